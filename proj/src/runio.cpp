#include "netobs/runio.hpp"

#include "netobs/kernels.hpp"
#include "netobs/rng.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace netobs::runio {

std::string RunConfig::canonical_string() const {
    std::ostringstream os;
    os << "seed=" << seed << ";alpha=" << alpha << ";q_scale=" << q_scale
       << ";r_scale=" << r_scale << ";dt=" << dt << ";tf=" << tf;
    for (const auto& [k, v] : extras) os << ";" << k << "=" << v;
    return os.str();
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(canonical_string()); }

std::string artifact_header(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# netobserve " << kVersion << "\n";
    os << "# seed=" << cfg.seed << "\n";
    os << std::hex << "# config_hash=" << cfg.config_hash() << std::dec << "\n";
    os << "# kernels=" << kernels::active_name() << "\n";
    return os.str();
}

int worker_count() {
    if (const char* env = std::getenv("NETOBSERVE_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

NodeSet load_node_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("load_node_list: cannot open " + path.string());
    NodeSet nodes;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long v;
        while (ls >> v) {
            if (v < 0 || v > 0x7fffffffLL) throw InputError("load_node_list: index out of range");
            nodes.push_back(static_cast<int>(v));
        }
    }
    return nodes;
}

void parallel_for_indexed(int count, const std::function<void(int)>& job) {
    int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mx;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mx);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace netobs::runio
