#include <stdio.h>
#include <stdlib.h>
#include <string.h>

struct pair {
  int a;
  int b;
};

int sum_local(int x) {
  struct pair st;
  st.a = x;
  st.b = 2;
  return (&st)->a + st.b;
}

int main(void) {
  printf("%d\n", sum_local(5));
  return 0;
}
