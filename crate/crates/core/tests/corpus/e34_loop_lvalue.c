#include <stdio.h>
#include <stdlib.h>
#include <string.h>

size_t count_parents(const char **parent_names) {
  const char *parent_name;
  size_t n = 0;
  while ((parent_name = *parent_names++)) {
    printf("%s\n", parent_name);
    n++;
  }
  return n;
}

int main(int argc, char **argv) {
  int bad = argc > 1 && strcmp(argv[1], "bad") == 0;
  const char *names[] = {"root", "etc", NULL};
  printf("%zu\n", count_parents(bad ? NULL : names));
  return 0;
}
