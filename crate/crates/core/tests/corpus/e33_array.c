#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(int argc, char **argv) {
  int counts[4];
  (void) argv;
  if (argc > 0)
    counts[1] = 8;
  printf("%d\n", counts[1]);
  return 0;
}
