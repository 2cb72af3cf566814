#pragma once

#include <cstdint>

#include "blockstore.hpp"
#include "cache.hpp"

namespace dedup {

struct PostprocessReport {
    uint64_t merges = 0;       // duplicate PBAs merged away
    uint64_t freed = 0;        // blocks reclaimed by garbage collection
    uint64_t peak_before = 0;  // live blocks when the pass started
    uint64_t peak_after = 0;   // live blocks after merge + gc
    double duration_ms = 0;
};

// Background exact-deduplication pass. Scans the fingerprint multi-table; for
// every fingerprint with several PBAs the lowest address is kept, all LBA
// mappings are repointed to it and the other blocks are reclaimed. Requires
// exclusive access to `store` and `lba_map` (the harness serializes it against
// the inline path). `cache` may be null; when given, resident entries whose
// block was merged away are rebound to the canonical PBA.
PostprocessReport run_postprocess(BlockStore& store, LbaMapping& lba_map,
                                  FingerprintCache* cache);

}  // namespace dedup
