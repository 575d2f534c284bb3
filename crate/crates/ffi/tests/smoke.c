#include <stdio.h>
#include <string.h>
#include "ph.h"

#define CHECK(x) do { int32_t rc_ = (x); if (rc_ != PH_OK) { \
    char msg[256]; ph_last_error_message(msg, sizeof msg); \
    fprintf(stderr, "%s -> %d: %s\n", #x, rc_, msg); return 1; } } while (0)

int main(void) {
    PhMesh *mesh = NULL;
    size_t nv, ne, nt, b0, b1, checks, failed;
    CHECK(ph_mesh_tank(1.0, 0.5, 4, 2, &mesh));
    CHECK(ph_mesh_counts(mesh, &nv, &ne, &nt));
    CHECK(ph_mesh_betti(mesh, &b0, &b1));
    CHECK(ph_check(mesh, "forms", 1, &checks, &failed));
    printf("%zu %zu %zu %zu %zu %zu %zu\n", nv, ne, nt, b0, b1, checks, failed);
    if (ph_check(mesh, "nope", 1, &checks, &failed) != PH_ERR_CONFIG) return 2;
    ph_mesh_free(mesh);
    if (ph_mesh_load("/nonexistent.mesh", &mesh) != PH_ERR_IO) return 3;
    printf("version %s\n", ph_version());
    return 0;
}
