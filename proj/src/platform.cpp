#include "crlkit/platform.hpp"

#if __has_include(<malloc.h>)
#include <malloc.h>
#endif

namespace crl {

void tune_allocator() {
#if defined(M_TOP_PAD) && defined(M_MMAP_THRESHOLD)
  // Activation matrices are a few MB and are freed every iteration. Without
  // padding the heap top is trimmed and regrown constantly, and each regrowth
  // costs fresh page faults. 32 MB is glibc's largest mmap threshold on 64-bit.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace crl
