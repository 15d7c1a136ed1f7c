/* Copyright 2026 The DeepClean Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* Compiles the public header as C and makes a few calls. */

#include <stdio.h>
#include <string.h>

#include "deepclean/deepclean.h"

int main(void) {
  unsigned char px[12] = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110};
  dc_image* img = NULL;
  dc_pool* pool = NULL;
  double p = 0.0;
  if (dc_image_create(2, 2, 3, px, &img) != DC_OK) return 1;
  if (dc_psnr(img, img, &p) != DC_OK) return 2;
  if (dc_pool_create(NULL, &pool) != DC_OK) return 3;
  if (dc_pool_size(pool) != 8) return 4;
  {
    dc_image* bad = NULL;
    if (dc_image_create(2, 2, 2, px, &bad) != DC_ERR_INVALID_ARGUMENT) return 5;
  }
  if (strlen(dc_last_error()) == 0) return 6;
  dc_pool_free(pool);
  dc_image_free(img);
  printf("deepclean %s ok\n", dc_version());
  return 0;
}
