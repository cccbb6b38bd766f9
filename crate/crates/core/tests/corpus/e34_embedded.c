#include <stdio.h>
#include <stdlib.h>
#include <string.h>

struct entry {
  int value;
};

static struct entry table[3] = {{10}, {20}, {30}};

struct entry *lookup(int key, int width) {
  if (key < 0)
    return NULL;
  return &table[(key * width) % 3];
}

int fetch(int key) {
  return lookup(key,
#ifdef WIDE
                2
#else
                1
#endif
                )->value;
}

int main(void) {
  printf("%d\n", fetch(1));
  return 0;
}
