#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(int argc, char **argv) {
  double d;
  (void) argv;
  if (argc > 0)
    d = 2.25;
  printf("%.3f\n", d);
  return 0;
}
