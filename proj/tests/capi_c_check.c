/* Compiled as C11: proves the public header is usable from plain C. */

#include <imp.h>

#include <stdio.h>
#include <string.h>

int main(void) {
  if (strcmp(imp_status_name(IMP_OK), "Ok") != 0) {
    fprintf(stderr, "unexpected status name\n");
    return 1;
  }
  if (imp_last_error() == NULL) {
    fprintf(stderr, "last error must never be NULL\n");
    return 1;
  }
  imp_spec* spec = NULL;
  imp_status status = imp_spec_load("/definitely/not/a/file.json", &spec);
  if (status != IMP_ERR_IO || spec != NULL) {
    fprintf(stderr, "expected an io failure, got %s\n", imp_status_name(status));
    return 1;
  }
  if (strlen(imp_last_error()) == 0) {
    fprintf(stderr, "expected an error message\n");
    return 1;
  }
  imp_spec_free(NULL); /* freeing NULL is a no-op */
  return 0;
}
