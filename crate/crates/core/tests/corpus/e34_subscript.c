#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int third(int *buf) {
  return buf[2];
}

int main(int argc, char **argv) {
  int bad = argc > 1 && strcmp(argv[1], "bad") == 0;
  int v[] = {1, 2, 3};
  printf("%d\n", third(bad ? NULL : v));
  return 0;
}
