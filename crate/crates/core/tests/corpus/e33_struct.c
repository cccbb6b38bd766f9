#include <stdio.h>
#include <stdlib.h>
#include <string.h>

struct point {
  int x;
  int y;
};

int main(int argc, char **argv) {
  struct point pt;
  (void) argv;
  if (argc > 0) {
    pt.x = 3;
    pt.y = 4;
  }
  printf("%d\n", pt.x + pt.y);
  return 0;
}
