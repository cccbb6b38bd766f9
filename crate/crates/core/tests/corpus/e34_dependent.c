#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int twice(int *p) {
  return 2 * p[0];
}

int main(int argc, char **argv) {
  int bad = argc > 1 && strcmp(argv[1], "bad") == 0;
  int v = 4;
  printf("%d\n", twice(bad ? NULL : &v));
  return 0;
}
