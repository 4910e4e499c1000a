use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use odec::env::{EnvSpec, Mode, UffConfig};
use odec::ppo::PolicyVector;
use odec_ffi::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn last_error() -> String {
    unsafe { CStr::from_ptr(odec_last_error()) }.to_string_lossy().into_owned()
}

fn new_uff(agents: usize, mode: OdecMode) -> *mut OdecEnv {
    let mut env = ptr::null_mut();
    assert_eq!(unsafe { odec_env_new_uff(agents, mode, &mut env) }, OdecStatus::Ok);
    assert!(!env.is_null());
    env
}

#[test]
fn environment_lifecycle() {
    let env = new_uff(2, OdecMode::Open);
    let (mut reward, mut done) = (0.0, false);
    // Stepping before the first reset is an error.
    let r = unsafe { odec_env_step(env, [0usize].as_ptr(), 1, &mut reward, &mut done) };
    assert_eq!(r, OdecStatus::EpisodeOver);
    assert!(last_error().contains("reset"));

    assert_eq!(unsafe { odec_env_reset(env, 0) }, OdecStatus::Ok);
    let (mut team, mut members) = (0u32, 0usize);
    assert_eq!(unsafe { odec_env_team(env, &mut team, &mut members) }, OdecStatus::Ok);
    assert_eq!((team, members), (1, 1));

    // CallAgent brings agent 1 in.
    assert_eq!(unsafe { odec_env_step(env, [4usize].as_ptr(), 1, &mut reward, &mut done) }, OdecStatus::Ok);
    assert_eq!(reward, -0.5);
    unsafe { odec_env_team(env, &mut team, &mut members) };
    assert_eq!((team, members), (2, 2));

    // Wrong number of actions.
    let r = unsafe { odec_env_step(env, [0usize].as_ptr(), 1, &mut reward, &mut done) };
    assert_eq!(r, OdecStatus::InvalidArgument);
    assert!(last_error().contains("2 members"), "{}", last_error());

    let mut frame = ptr::null_mut();
    assert_eq!(unsafe { odec_env_render(env, &mut frame) }, OdecStatus::Ok);
    let text = unsafe { CStr::from_ptr(frame) }.to_str().unwrap().to_string();
    assert!(text.starts_with("t=1 team=2 [0, 1]"), "{text}");
    unsafe {
        odec_string_free(frame);
        odec_env_free(env);
    }
}

#[test]
fn null_and_invalid_arguments() {
    unsafe {
        assert_eq!(odec_env_new_uff(2, OdecMode::Open, ptr::null_mut()), OdecStatus::NullPointer);
        assert!(last_error().contains("out"));
        let mut env = ptr::null_mut();
        assert_eq!(odec_env_new_uff(0, OdecMode::Open, &mut env), OdecStatus::InvalidArgument);
        assert!(env.is_null());
        assert_eq!(odec_env_reset(ptr::null_mut(), 0), OdecStatus::NullPointer);
        let (mut r, mut d) = (0.0, false);
        let env = new_uff(2, OdecMode::Closed);
        odec_env_reset(env, 0);
        assert_eq!(odec_env_step(env, ptr::null(), 2, &mut r, &mut d), OdecStatus::NullPointer);
        assert_eq!(odec_env_step(env, [9usize, 0].as_ptr(), 2, &mut r, &mut d), OdecStatus::InvalidArgument);
        odec_env_free(env);
        odec_env_free(ptr::null_mut());
        odec_policy_free(ptr::null_mut());
        odec_string_free(ptr::null_mut());

        let mut p = ptr::null_mut();
        let missing = CString::new("/no/such/policy.json").unwrap();
        assert_eq!(odec_policy_load(missing.as_ptr(), 0, &mut p), OdecStatus::Io);
        assert_eq!(odec_policy_load(ptr::null(), 0, &mut p), OdecStatus::NullPointer);
    }
}

#[test]
fn policies_act_through_handles() {
    let spec = EnvSpec::Uff(UffConfig::new(2, Mode::Open));
    let policies = PolicyVector::new(&spec, &[8], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.json");
    policies.save(&path).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();

    let mut policy = ptr::null_mut();
    assert_eq!(unsafe { odec_policy_load(cpath.as_ptr(), 3, &mut policy) }, OdecStatus::Ok);
    let env = new_uff(2, OdecMode::Open);
    unsafe { odec_env_reset(env, 0) };
    let mut actions = [0usize; 2];
    let mut len = 0;
    let status = unsafe { odec_policy_act(policy, env, true, actions.as_mut_ptr(), 2, &mut len) };
    assert_eq!(status, OdecStatus::Ok);
    assert_eq!(len, 1);
    let state = spec.build().unwrap().reset(0);
    let expected = policies.act(&state, true, &mut ChaCha8Rng::seed_from_u64(0)).unwrap().0;
    assert_eq!(actions[..1], expected.actions[..]);
    assert_eq!(unsafe { odec_policy_act(policy, env, false, actions.as_mut_ptr(), 0, &mut len) }, OdecStatus::BufferTooSmall);
    assert_eq!(len, 1);

    let other = new_uff(3, OdecMode::Open);
    unsafe { odec_env_reset(other, 0) };
    let status = unsafe { odec_policy_act(policy, other, true, actions.as_mut_ptr(), 2, &mut len) };
    assert_eq!(status, OdecStatus::InvalidArgument);
    unsafe {
        odec_env_free(env);
        odec_env_free(other);
        odec_policy_free(policy);
    }
}

#[test]
fn cli_and_selftest_entry_points() {
    let mut failed = 1;
    assert_eq!(unsafe { odec_selftest(&mut failed) }, OdecStatus::Ok);
    assert_eq!(failed, 0);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.jsonl");
    let args: Vec<CString> = ["odec", "gen-experts", "--steps", "50", "--seed", "1", "--out", out.to_str().unwrap()]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let argv: Vec<_> = args.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { odec_cli_run(argv.len() as i32, argv.as_ptr()) }, 0);
    assert!(out.is_file());
    assert_eq!(unsafe { odec_cli_run(0, ptr::null()) }, 1);
    let version = unsafe { CStr::from_ptr(odec_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/odec.h")
}

#[test]
fn header_declares_the_exported_functions() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "odec_last_error",
        "odec_env_new_uff",
        "odec_env_new_assembly",
        "odec_env_step",
        "odec_policy_act",
        "odec_cli_run",
        "ODEC_STATUS_EPISODE_OVER",
        "typedef struct OdecEnv OdecEnv;",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libodec_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/smoke.c");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    // CallAgent forever: one solo step, then both agents idle until the horizon.
    assert!(text.starts_with("steps=50 total=-49.50\n"), "{text}");
}
