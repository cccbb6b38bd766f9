#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int twice(int n) {
  return 2 * n;
}

int main(void) {
  printf("%d\n", twice(21));
  return 0;
}
