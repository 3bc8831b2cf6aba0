/*
 * Copyright 2026 The auxvi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *                 http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Plain C consumer of the public header. */

#include "auxvi/auxvi.h"

#include <stdio.h>
#include <string.h>

int main(void) {
  auxvi_config* cfg = NULL;
  if (strcmp(auxvi_version(), "0.1.0") != 0) {
    return 1;
  }
  if (auxvi_config_parse("[train]\nsteps = 10\n", &cfg) != AUXVI_OK) {
    fprintf(stderr, "%s\n", auxvi_last_error());
    return 1;
  }
  if (strstr(auxvi_config_text(cfg), "steps = 10") == NULL) {
    return 1;
  }
  if (auxvi_config_set(cfg, "train.nonsense", "1") != AUXVI_ERR_CONFIG) {
    return 1;
  }
  auxvi_config_free(cfg);
  puts("ok");
  return 0;
}
