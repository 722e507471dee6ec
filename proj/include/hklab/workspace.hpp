#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "hklab/graph.hpp"
#include "hklab/walk.hpp"

namespace hklab {

/**
 * Memoised exit times, volumes and safe radii for one graph. Thread-safe; values are
 * computed outside the lock, so concurrent misses may solve twice but always store the
 * same bits.
 *
 * With a disk cache attached (the CLI uses $HKLAB_CACHE) exit times persist across runs
 * in `<dir>/exit-<fingerprint>.bin`.
 */
class Workspace {
public:
    explicit Workspace(const WeightedGraph& g);

    const WeightedGraph& graph() const noexcept { return *g_; }

    double exit_time(Vertex x, int R);
    std::shared_ptr<const ExitField> exit_field(Vertex x, int R);
    double volume(Vertex x, int R);
    int safe_radius(Vertex x);
    /// min_{y in B(x,R)} E(y,q)
    double min_exit_time_over_ball(Vertex x, int R, int q);

    void attach_disk_cache(const std::filesystem::path& dir);
    void flush() const;
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
    static std::uint64_t key(Vertex x, int R) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(R);
    }

    const WeightedGraph* g_;
    std::uint64_t fingerprint_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, double> exit_;
    std::unordered_map<std::uint64_t, double> volume_;
    std::unordered_map<std::uint64_t, double> ball_min_;
    std::unordered_map<Vertex, int> safe_;
    std::optional<std::filesystem::path> disk_;
};

}  // namespace hklab
