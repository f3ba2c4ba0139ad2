/* C interface for the flowcheck toolkit.
 *
 * Hand-maintained to match crates/flowcheck-ffi/src/lib.rs; update both
 * together. All functions are thread-safe; the last-error message is
 * thread-local. Strings are NUL-terminated UTF-8. Handles own their data and
 * must be released with the matching *_free function exactly once.
 */

#ifndef FLOWCHECK_H
#define FLOWCHECK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible function. */
typedef enum FcStatus {
  FC_OK = 0,
  FC_ERR_NULL_POINTER = 1,
  FC_ERR_INVALID_ARGUMENT = 2,
  FC_ERR_PARSE = 3,
  FC_ERR_CONSTRUCTION = 4,
  FC_ERR_UNSUPPORTED = 5,
  FC_ERR_IO = 6,
  FC_ERR_UTF8 = 7
} FcStatus;

/* Opaque handles. */
typedef struct FcInstance FcInstance;
typedef struct FcAssignment FcAssignment;

/* Copies this thread's last error message into buf (NUL-terminated, truncated
 * to cap bytes); returns the full message length. buf may be NULL to query
 * the length only. */
size_t fc_last_error(char *buf, size_t cap);

/* Instance construction. Text format: first line the node count n, then n
 * rows of whitespace-separated integer costs. */
int32_t fc_instance_from_text(const char *text, FcInstance **out);

/* name is "abcd" (4 nodes) or "graph8" (8 nodes). */
int32_t fc_instance_table(const char *name, FcInstance **out);

/* Valley-family instance from its geometry; fails on invalid geometry
 * (paths must be 1..=3, valley_size a multiple of paths, cross_cost large
 * enough, ...). */
int32_t fc_instance_valleys(uint16_t lead_in, uint16_t lead_out,
                            uint16_t valley_size, uint16_t paths,
                            uint16_t pairs, int64_t cross_cost,
                            int64_t in_cost, FcInstance **out);

/* Node count, or 0 for NULL. */
uint32_t fc_instance_node_count(const FcInstance *inst);

void fc_instance_free(FcInstance *inst);

/* Exact solve. use_branch_and_bound = 0 selects exhaustive enumeration
 * (refuses large instances), nonzero the branch-and-bound search. On success
 * writes the optimal tour cost and the number of optimal fixed-start directed
 * tours found. */
int32_t fc_solve(const FcInstance *inst, int32_t use_branch_and_bound,
                 int64_t *cost_out, uint64_t *count_out);

/* Reads an assignment file of "name<TAB>numerator/denominator" lines.
 * total_flow is the flow constant as a decimal or "p/q" string. */
int32_t fc_assignment_read(const char *path, const char *total_flow,
                           FcAssignment **out);

/* Runs the valley flow construction for dimension 'x', 'y', or 'z' and
 * returns the constructed assignment (y/z: merged conditioned records with
 * the arc flow on the diagonal). */
int32_t fc_construct_valleys(uint16_t lead_in, uint16_t lead_out,
                             uint16_t valley_size, uint16_t paths,
                             uint16_t pairs, int64_t cross_cost,
                             int64_t in_cost, char dim, uint64_t total_flow,
                             FcAssignment **out);

/* Number of nonzero records, or 0 for NULL. */
uint64_t fc_assignment_len(const FcAssignment *a);

/* Exact objective value rendered as an integer or "p/q" string into buf
 * (NUL-terminated, truncated to cap); buf may be NULL to skip the copy. */
int32_t fc_objective(const FcInstance *inst, const FcAssignment *a, char *buf,
                     size_t cap);

/* Checks the assignment against the model of the given dimension ('x', 'y',
 * or 'z') built over the instance; free_start toggles the extended stage
 * ranges. Writes the constraint-violation and bound-violation counts. Returns
 * FC_OK even when violations exist -- the counts carry the verdict. */
int32_t fc_check(const FcInstance *inst, const FcAssignment *a, char dim,
                 int32_t free_start, uint64_t total_flow,
                 uint64_t *violations_out, uint64_t *bound_violations_out);

void fc_assignment_free(FcAssignment *a);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FLOWCHECK_H */
