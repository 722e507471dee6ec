#include "hklab/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "hklab/errors.hpp"
#include "hklab/graph_io.hpp"

namespace hklab {

namespace {

std::uint64_t graph_fingerprint(const WeightedGraph& g) {
    std::string text = to_hkgraph(g);
    for (Vertex f : g.frontier()) text += "frontier " + std::to_string(f) + "\n";
    return std::hash<std::string>{}(text);
}

struct CacheRecord {
    std::int32_t x;
    std::int32_t R;
    double value;
};

}  // namespace

Workspace::Workspace(const WeightedGraph& g) : g_(&g), fingerprint_(graph_fingerprint(g)) {}

double Workspace::exit_time(Vertex x, int R) {
    const auto k = key(x, R);
    {
        std::lock_guard lock(mutex_);
        if (auto it = exit_.find(k); it != exit_.end()) return it->second;
    }
    const double E = mean_exit_field(*g_, x, R).at_center();
    std::lock_guard lock(mutex_);
    exit_.try_emplace(k, E);
    return E;
}

std::shared_ptr<const ExitField> Workspace::exit_field(Vertex x, int R) {
    auto field = std::make_shared<const ExitField>(mean_exit_field(*g_, x, R));
    std::lock_guard lock(mutex_);
    exit_.try_emplace(key(x, R), field->at_center());
    return field;
}

double Workspace::volume(Vertex x, int R) {
    const auto k = key(x, R);
    {
        std::lock_guard lock(mutex_);
        if (auto it = volume_.find(k); it != volume_.end()) return it->second;
    }
    const double V = hklab::volume(*g_, x, R);
    std::lock_guard lock(mutex_);
    volume_.try_emplace(k, V);
    return V;
}

int Workspace::safe_radius(Vertex x) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = safe_.find(x); it != safe_.end()) return it->second;
    }
    const int r = hklab::safe_radius(*g_, x);
    std::lock_guard lock(mutex_);
    safe_.try_emplace(x, r);
    return r;
}

double Workspace::min_exit_time_over_ball(Vertex x, int R, int q) {
    const auto k = key(x, R) ^ (static_cast<std::uint64_t>(q) << 48);
    {
        std::lock_guard lock(mutex_);
        if (auto it = ball_min_.find(k); it != ball_min_.end()) return it->second;
    }
    double m = std::numeric_limits<double>::infinity();
    for (auto [y, d] : ball_layers(*g_, x, R)) m = std::min(m, exit_time(y, q));
    std::lock_guard lock(mutex_);
    ball_min_.try_emplace(k, m);
    return m;
}

namespace {

std::filesystem::path cache_file(const std::filesystem::path& dir, std::uint64_t fp) {
    std::ostringstream name;
    name << "exit-" << std::hex << fp << ".bin";
    return dir / name.str();
}

}  // namespace

void Workspace::attach_disk_cache(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    disk_ = dir;
    std::ifstream in(cache_file(dir, fingerprint_), std::ios::binary);
    if (!in) return;
    CacheRecord rec{};
    std::lock_guard lock(mutex_);
    while (in.read(reinterpret_cast<char*>(&rec), sizeof rec)) {
        if (g_->contains(rec.x) && rec.R > 0) exit_.try_emplace(key(rec.x, rec.R), rec.value);
    }
}

void Workspace::flush() const {
    if (!disk_) return;
    std::vector<CacheRecord> records;
    {
        std::lock_guard lock(mutex_);
        records.reserve(exit_.size());
        for (const auto& [k, v] : exit_) {
            records.push_back({static_cast<std::int32_t>(k >> 32), static_cast<std::int32_t>(k & 0xffffffffu), v});
        }
    }
    std::sort(records.begin(), records.end(),
              [](const CacheRecord& a, const CacheRecord& b) { return std::tie(a.x, a.R) < std::tie(b.x, b.R); });
    const auto path = cache_file(*disk_, fingerprint_);
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache " + tmp.string());
        out.write(reinterpret_cast<const char*>(records.data()),
                  static_cast<std::streamsize>(records.size() * sizeof(CacheRecord)));
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace hklab
