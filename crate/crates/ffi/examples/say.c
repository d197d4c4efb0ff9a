/* cc say.c -I../include -L../../../target/release -l:libneurotts_ffi.a -lm -lpthread -ldl -o say */
#include <stdio.h>
#include "neurotts.h"

int main(int argc, char **argv) {
    if (argc != 4) {
        fprintf(stderr, "usage: %s CONFIG TEXT OUT.wav\n", argv[0]);
        return 1;
    }
    NttsPipeline *p = NULL;
    if (ntts_pipeline_load(argv[1], &p) != NTTS_STATUS_OK) {
        fprintf(stderr, "load: %s\n", ntts_last_error());
        return 2;
    }
    NttsAudio *audio = NULL;
    NttsStatus s = ntts_say(p, argv[2], &audio);
    if (s != NTTS_STATUS_OK) {
        fprintf(stderr, "say: %s\n", ntts_last_error());
        ntts_pipeline_free(p);
        return 2;
    }
    const double *samples;
    size_t n;
    ntts_audio_samples(audio, &samples, &n);
    printf("%zu samples at %u Hz\n", n, ntts_audio_sample_rate(audio));
    s = ntts_audio_write_wav(audio, argv[3]);
    ntts_audio_free(audio);
    ntts_pipeline_free(p);
    return s == NTTS_STATUS_OK ? 0 : 2;
}
