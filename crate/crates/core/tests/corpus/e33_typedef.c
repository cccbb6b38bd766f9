#include <stdio.h>
#include <stdlib.h>
#include <string.h>

typedef struct {
  int fd;
  long offset;
} handle_t;

int main(int argc, char **argv) {
  handle_t h;
  (void) argv;
  if (argc > 0) {
    h.fd = 2;
    h.offset = 10;
  }
  printf("%d %ld\n", h.fd, h.offset);
  return 0;
}
