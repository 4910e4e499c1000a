//! C ABI over the `odec` library.
//!
//! Handles are opaque pointers created by `*_new`/`*_load` and released by the
//! matching `*_free`. Every fallible call returns an [`OdecStatus`]; on failure
//! [`odec_last_error`] describes the problem until the next failing call on the
//! same thread. Strings returned by the library are freed with [`odec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;

use odec::env::{AssemblyConfig, EnvSpec, Environment, Mode, UffConfig};
use odec::model::TeamAction;
use odec::ppo::PolicyVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The episode is over; reset before stepping again.
    EpisodeOver = 3,
    /// Output buffer too small; the required length was written.
    BufferTooSmall = 4,
    Io = 5,
    Runtime = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdecMode {
    Open = 0,
    Closed = 1,
}

impl From<OdecMode> for Mode {
    fn from(m: OdecMode) -> Self {
        match m {
            OdecMode::Open => Mode::Open,
            OdecMode::Closed => Mode::Closed,
        }
    }
}

/// A running environment.
pub struct OdecEnv {
    env: Box<dyn Environment>,
    done: bool,
}

/// Trained policies with their own sampling RNG.
pub struct OdecPolicy {
    policies: PolicyVector,
    rng: ChaCha8Rng,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: OdecStatus, message: impl std::fmt::Display) -> OdecStatus {
    let text = CString::new(message.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
    status
}

macro_rules! deref {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(OdecStatus::NullPointer, concat!($name, " is null")),
        }
    };
}

/// Message for the most recent failure on this thread; empty if none. Valid until the
/// next failing call on this thread.
#[no_mangle]
pub extern "C" fn odec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn odec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn odec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

fn new_env(spec: EnvSpec, out: *mut *mut OdecEnv) -> OdecStatus {
    let out = deref!(out, "out");
    match spec.build() {
        Ok(env) => {
            *out = Box::into_raw(Box::new(OdecEnv { env, done: true }));
            OdecStatus::Ok
        }
        Err(e) => fail(OdecStatus::InvalidArgument, e),
    }
}

/// Urban firefighting with `max_agents` agents and default rewards.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn odec_env_new_uff(max_agents: usize, mode: OdecMode, out: *mut *mut OdecEnv) -> OdecStatus {
    new_env(EnvSpec::Uff(UffConfig::new(max_agents, mode.into())), out)
}

/// Robot-human assembly with default rewards.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn odec_env_new_assembly(mode: OdecMode, out: *mut *mut OdecEnv) -> OdecStatus {
    new_env(EnvSpec::Assembly(AssemblyConfig::new(mode.into())), out)
}

/// # Safety
/// `env` must come from `odec_env_new_*` and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn odec_env_free(env: *mut OdecEnv) {
    if !env.is_null() {
        drop(unsafe { Box::from_raw(env) });
    }
}

/// Starts an episode.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn odec_env_reset(env: *mut OdecEnv, seed: u64) -> OdecStatus {
    let env = deref!(env, "env");
    env.env.reset(seed);
    env.done = false;
    OdecStatus::Ok
}

/// Current team id and its number of members.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn odec_env_team(env: *mut OdecEnv, team: *mut u32, members: *mut usize) -> OdecStatus {
    let env = deref!(env, "env");
    let team = deref!(team, "team");
    let members = deref!(members, "members");
    let state = env.env.state();
    *team = state.team.0;
    *members = state.locals.len();
    OdecStatus::Ok
}

/// Applies one action per current team member, in ascending agent order.
///
/// # Safety
/// `actions` must point to `len` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn odec_env_step(
    env: *mut OdecEnv,
    actions: *const usize,
    len: usize,
    reward: *mut f64,
    done: *mut bool,
) -> OdecStatus {
    let env = deref!(env, "env");
    let reward = deref!(reward, "reward");
    let done = deref!(done, "done");
    if actions.is_null() && len > 0 {
        return fail(OdecStatus::NullPointer, "actions is null");
    }
    if env.done {
        return fail(OdecStatus::EpisodeOver, "episode is over; call odec_env_reset");
    }
    let actions = if len == 0 { &[][..] } else { unsafe { std::slice::from_raw_parts(actions, len) } };
    let action = TeamAction {
        team: env.env.state().team,
        actions: actions.to_vec(),
    };
    match env.env.step(&action) {
        Ok(t) => {
            *reward = t.reward;
            *done = t.done;
            env.done = t.done;
            OdecStatus::Ok
        }
        Err(e) => fail(OdecStatus::InvalidArgument, e),
    }
}

/// Text frame of the current state; free with `odec_string_free`.
///
/// # Safety
/// `env` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn odec_env_render(env: *mut OdecEnv, out: *mut *mut c_char) -> OdecStatus {
    let env = deref!(env, "env");
    let out = deref!(out, "out");
    *out = CString::new(env.env.render()).unwrap_or_default().into_raw();
    OdecStatus::Ok
}

/// Loads a policy checkpoint. `seed` seeds stochastic action sampling.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn odec_policy_load(path: *const c_char, seed: u64, out: *mut *mut OdecPolicy) -> OdecStatus {
    let out = deref!(out, "out");
    if path.is_null() {
        return fail(OdecStatus::NullPointer, "path is null");
    }
    let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
        return fail(OdecStatus::InvalidArgument, "path is not UTF-8");
    };
    match PolicyVector::load(&PathBuf::from(path)) {
        Ok(policies) => {
            *out = Box::into_raw(Box::new(OdecPolicy {
                policies,
                rng: ChaCha8Rng::seed_from_u64(seed),
            }));
            OdecStatus::Ok
        }
        Err(e) => fail(OdecStatus::Io, e),
    }
}

/// # Safety
/// `policy` must come from `odec_policy_load` and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn odec_policy_free(policy: *mut OdecPolicy) {
    if !policy.is_null() {
        drop(unsafe { Box::from_raw(policy) });
    }
}

/// Chooses the current team's joint action in `env`: each member's most likely action
/// when `greedy`, otherwise a sample. Writes `*len` actions into `actions`, which holds
/// `capacity` values.
///
/// # Safety
/// `actions` must hold `capacity` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn odec_policy_act(
    policy: *mut OdecPolicy,
    env: *mut OdecEnv,
    greedy: bool,
    actions: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> OdecStatus {
    let policy = deref!(policy, "policy");
    let env = deref!(env, "env");
    let len = deref!(len, "len");
    if policy.policies.spec().with_mode(Mode::Open) != env.env.spec().with_mode(Mode::Open) {
        return fail(
            OdecStatus::InvalidArgument,
            format!("policy is for {}, environment is {}", policy.policies.spec().tag(), env.env.spec().tag()),
        );
    }
    let members = env.env.state().locals.len();
    *len = members;
    if capacity < members {
        return fail(OdecStatus::BufferTooSmall, format!("need room for {members} actions"));
    }
    if actions.is_null() {
        return fail(OdecStatus::NullPointer, "actions is null");
    }
    match policy.policies.act(env.env.state(), greedy, &mut policy.rng) {
        Ok((action, _)) => {
            let dst = unsafe { std::slice::from_raw_parts_mut(actions, members) };
            dst.copy_from_slice(&action.actions);
            OdecStatus::Ok
        }
        Err(e) => fail(OdecStatus::Runtime, e),
    }
}

/// Runs the command-line interface with `argc` arguments (the first is the program
/// name) and returns its exit code: 0 success, 1 invalid input, 2 runtime failure.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn odec_cli_run(argc: c_int, argv: *const *const c_char) -> c_int {
    if argv.is_null() || argc < 1 {
        fail(OdecStatus::NullPointer, "argv is null or empty");
        return 1;
    }
    let mut args = Vec::with_capacity(argc as usize);
    for k in 0..argc as usize {
        let p = unsafe { *argv.add(k) };
        if p.is_null() {
            fail(OdecStatus::NullPointer, format!("argv[{k}] is null"));
            return 1;
        }
        args.push(unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned());
    }
    odec::harness::cli::run(args)
}

/// Runs the built-in checks; `failed` receives the number that failed.
///
/// # Safety
/// `failed` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn odec_selftest(failed: *mut usize) -> OdecStatus {
    let failed = deref!(failed, "failed");
    match odec::harness::selftest() {
        Ok(checks) => {
            *failed = checks.iter().filter(|c| !c.passed).count();
            OdecStatus::Ok
        }
        Err(e) => fail(OdecStatus::Runtime, e),
    }
}
