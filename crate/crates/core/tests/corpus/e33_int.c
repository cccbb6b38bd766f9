#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(int argc, char **argv) {
  int x;
  (void) argv;
  if (argc > 0)
    x = 5;
  printf("%d\n", x);
  return 0;
}
