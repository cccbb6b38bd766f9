#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int hits;

int main(void) {
  hits++;
  printf("%d\n", hits);
  return 0;
}
