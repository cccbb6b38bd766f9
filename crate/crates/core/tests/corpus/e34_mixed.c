#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int peek(int *p) {
  int v;
  v = *(p
#ifdef OFFSET
        + 1);
#else
        );
#endif
  return v;
}

int main(void) {
  int a[2] = {5, 6};
  printf("%d\n", peek(a));
  return 0;
}
