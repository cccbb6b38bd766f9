#include <stdio.h>
#include <stdlib.h>
#include <string.h>

char first_char(int k) {
  char buf[8];
  snprintf(buf, sizeof buf, "%d", k);
  return buf[0];
}

char letter(void) {
  return "xyz"[1];
}

int main(void) {
  printf("%c%c\n", first_char(42), letter());
  return 0;
}
