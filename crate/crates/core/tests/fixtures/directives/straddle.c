/* expect: Mixed */
int pick(int a, int b) {
  int x;
  x =
#ifdef WINDOWS
  /*<*/a +
#else /* LINUX */
  a *
#endif
  b/*>*/;
  return x;
}
