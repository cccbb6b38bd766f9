#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int sum(int *v, int n) {
  register int *r = v;
  int s = 0;
  while (n-- > 0)
    s += *r++;
  return s;
}

int main(void) {
  int v[] = {1, 2, 3, 4};
  printf("%d\n", sum(v, 4));
  return 0;
}
