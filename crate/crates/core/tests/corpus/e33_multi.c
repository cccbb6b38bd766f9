#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int pick(int c) {
  int a, b;
  a = 1;
  if (c)
    b = 2;
  return a + b;
}

int main(void) {
  printf("%d\n", pick(1));
  return 0;
}
