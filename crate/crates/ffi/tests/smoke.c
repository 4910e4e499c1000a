#include <stdio.h>
#include <string.h>

#include "odec.h"

int main(void) {
    OdecEnv *env = NULL;
    if (odec_env_new_uff(2, ODEC_MODE_OPEN, &env) != ODEC_STATUS_OK) {
        fprintf(stderr, "new: %s\n", odec_last_error());
        return 1;
    }
    odec_env_reset(env, 0);
    double total = 0.0;
    bool done = false;
    int steps = 0;
    while (!done) {
        uint32_t team;
        size_t members;
        odec_env_team(env, &team, &members);
        size_t actions[2] = {4, 4};
        double reward;
        if (odec_env_step(env, actions, members, &reward, &done) != ODEC_STATUS_OK) {
            fprintf(stderr, "step: %s\n", odec_last_error());
            return 1;
        }
        total += reward;
        steps++;
    }
    size_t none[1] = {0};
    double r;
    if (odec_env_step(env, none, 1, &r, &done) != ODEC_STATUS_EPISODE_OVER) {
        return 1;
    }
    if (strstr(odec_last_error(), "reset") == NULL) {
        return 1;
    }
    char *frame = NULL;
    odec_env_render(env, &frame);
    printf("steps=%d total=%.2f\n%s", steps, total, frame);
    odec_string_free(frame);
    odec_env_free(env);
    return 0;
}
