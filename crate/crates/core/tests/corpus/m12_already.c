#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int compute(int a) {
  return a + 1;
}

int main(void) {
  (void) compute(2);
  puts("ok");
  return 0;
}
