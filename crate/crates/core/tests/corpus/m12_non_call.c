#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(int argc, char **argv) {
  int x;
  (void) argv;
  x = argc + 1;
  puts("ok");
  return 0;
}
