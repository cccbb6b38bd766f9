#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int is_negative(unsigned u) {
  if (u < 0)
    return 1;
  return 0;
}

int main(void) {
  printf("%d\n", is_negative(7u));
  return 0;
}
