#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int read_counter(void) {
  extern int counter;
  return counter;
}

int counter = 3;

int main(void) {
  printf("%d\n", read_counter());
  return 0;
}
