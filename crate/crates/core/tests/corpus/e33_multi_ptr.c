#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int deref_sum(int c, int *src) {
  int *p, q;
  if (c) {
    p = src;
    q = 1;
  }
  return *p + q;
}

int main(void) {
  int v = 6;
  printf("%d\n", deref_sum(1, &v));
  return 0;
}
