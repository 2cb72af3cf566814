#include "postprocess.hpp"

#include <algorithm>
#include <chrono>

#include "errors.hpp"

namespace dedup {

PostprocessReport run_postprocess(BlockStore& store, LbaMapping& lba_map,
                                  FingerprintCache* cache) {
    auto t0 = std::chrono::steady_clock::now();
    store.check_integrity();

    PostprocessReport rep;
    rep.peak_before = store.live_blocks();

    for (const Fingerprint& fp : store.duplicate_fingerprints()) {
        std::vector<Pba> pbas = store.pbas_of(fp);
        const Pba canonical = pbas.front();  // lowest address, pbas_of is ascending
        for (size_t i = 1; i < pbas.size(); ++i) {
            const Pba dup = pbas[i];
            // copy: the reverse index shrinks as mappings move
            std::vector<std::pair<StreamId, Lba>> refs = lba_map.refs_of(dup);
            for (const auto& [s, lba] : refs) lba_map.set(s, lba, canonical, store);
            ++rep.merges;
        }
        if (cache) cache->rebind(fp, canonical);
    }

    rep.freed = store.collect_garbage();
    rep.peak_after = store.live_blocks();
    rep.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace dedup
