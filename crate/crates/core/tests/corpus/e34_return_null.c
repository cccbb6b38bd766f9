#include <stdio.h>
#include <stdlib.h>
#include <string.h>

struct node {
  int value;
  struct node *next;
};

struct node *nth_next(struct node *list, int k) {
  if (k < 0)
    return NULL;
  return list->next;
}

int main(int argc, char **argv) {
  int bad = argc > 1 && strcmp(argv[1], "bad") == 0;
  struct node b = {2, NULL};
  struct node a = {1, &b};
  struct node *r = nth_next(bad ? NULL : &a, 1);
  if (r == NULL)
    return 4;
  printf("%d\n", r->value);
  return 0;
}
