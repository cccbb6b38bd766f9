#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "acr.h"

int get(int *p) {
  int x;
  x = *null_check(p, abort());
  return x;
}

int main(int argc, char **argv) {
  int bad = argc > 1 && strcmp(argv[1], "bad") == 0;
  int v = 3;
  printf("%d\n", get(bad ? NULL : &v));
  return 0;
}
