/* expect: Embedded */
int pick(int a, int b, int c) {
  int x;
  x = /*<*/
#ifdef WINDOWS
  a
#else /* LINUX */
  c
#endif
  + b/*>*/;
  return x;
}
