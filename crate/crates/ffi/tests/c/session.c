#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "lweid.h"

#define CHECK(x)                                                              \
  do {                                                                        \
    LweidStatus s_ = (x);                                                     \
    if (s_ != LWEID_STATUS_OK) {                                              \
      fprintf(stderr, "%s:%d: status %d: %s\n", __FILE__, __LINE__, (int)s_, \
              lweid_last_error());                                            \
      return 1;                                                               \
    }                                                                         \
  } while (0)

static int pump_verifier(LweidVerifier *v, LweidProver *p) {
  size_t len = lweid_verifier_output_len(v), got = 0;
  if (len == 0) return 0;
  uint8_t *buf = malloc(len);
  CHECK(lweid_verifier_take_output(v, buf, len, &got));
  CHECK(lweid_prover_receive(p, buf, got));
  free(buf);
  return 0;
}

static int pump_prover(LweidProver *p, LweidVerifier *v) {
  size_t len = lweid_prover_output_len(p), got = 0;
  if (len == 0) return 0;
  uint8_t *buf = malloc(len);
  CHECK(lweid_prover_take_output(p, buf, len, &got));
  CHECK(lweid_verifier_receive(v, buf, got));
  free(buf);
  return 0;
}

static int run(uint8_t scheme) {
  const uint8_t seed[16] = {1, 2, 3};
  LweidKey *key = NULL, *pub = NULL, *again = NULL;
  CHECK(lweid_keygen(scheme, 32, 16, 31, 3.0, 12, 128, 256, seed, sizeof seed, &key));
  CHECK(lweid_key_public(key, &pub));
  if (lweid_key_has_secret(key) != 1 || lweid_key_has_secret(pub) != 0) return 1;

  size_t need = 0;
  if (lweid_key_serialize(pub, NULL, 0, &need) != LWEID_STATUS_BUFFER_TOO_SMALL) return 1;
  uint8_t *img = malloc(need);
  CHECK(lweid_key_serialize(pub, img, need, &need));
  CHECK(lweid_key_load(img, need, &again));
  free(img);

  LweidVerifier *v = NULL;
  LweidProver *p = NULL;
  if (lweid_verifier_new(key, 0, seed, 4, &v) != LWEID_STATUS_WRONG_KEY_KIND) return 1;
  CHECK(lweid_verifier_new(again, 0, seed, 4, &v));
  CHECK(lweid_prover_new(key, seed, 8, &p));
  for (int i = 0; i < 1000 && lweid_verifier_verdict(v) == LWEID_VERDICT_PENDING; i++) {
    if (pump_verifier(v, p) || pump_prover(p, v)) return 1;
  }
  if (pump_verifier(v, p)) return 1;
  int vv = lweid_verifier_verdict(v), pv = lweid_prover_verdict(p);
  printf("scheme %u: verifier %d prover %d\n", scheme, vv, pv);
  lweid_verifier_free(v);
  lweid_prover_free(p);
  lweid_key_free(key);
  lweid_key_free(pub);
  lweid_key_free(again);
  return vv == 0 && pv == 0 ? 0 : 1;
}

int main(void) {
  uint32_t r = 0;
  CHECK(lweid_rounds_for_target(LWEID_SCHEME_STERN, 257, 1.0 / 65536.0, &r));
  if (r != 28) return 1;
  LweidKey *k = NULL;
  if (lweid_keygen(LWEID_SCHEME_STERN, 8, 4, 256, 3.0, 1, 128, 256, NULL, 0, &k) !=
      LWEID_STATUS_INVALID_PARAMS)
    return 1;
  return run(LWEID_SCHEME_STERN) || run(LWEID_SCHEME_CVE);
}
