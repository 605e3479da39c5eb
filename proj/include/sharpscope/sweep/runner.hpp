#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sharpscope/errors.hpp"

namespace sharpscope::sweep {

/// Apply fn to every job on a share-nothing worker pool. Results land in
/// input order, so the output is byte-identical for any worker count; the
/// first job exception (by index) is rethrown after all workers join.
template <typename Job, typename Fn>
auto parallel_map(const std::vector<Job>& jobs, int workers, Fn&& fn)
    -> std::vector<decltype(fn(jobs.front()))> {
    using Result = decltype(fn(jobs.front()));
    std::vector<Result> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    if (jobs.empty()) return results;

    workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = fn(jobs[i]);
        return results;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                results[i] = fn(jobs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

/// Output root: the manifest's out_dir, unless SHARPSCOPE_OUT overrides it.
inline std::filesystem::path resolve_out_dir(const std::string& manifest_out_dir) {
    if (const char* env = std::getenv("SHARPSCOPE_OUT"); env && *env)
        return std::filesystem::path(env);
    return std::filesystem::path(manifest_out_dir);
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Every artifact embeds its manifest hash near the top. Writing over a file
/// that carries a *different* hash is refused unless forced; identical hashes
/// re-run freely.
inline void write_guarded(const std::filesystem::path& path, const std::string& content,
                          const std::string& manifest_hash, bool force) {
    namespace fs = std::filesystem;
    if (fs::exists(path) && !force) {
        const std::string existing = read_text_file(path);
        const std::string needle = "manifest=" + manifest_hash;
        const auto head = existing.substr(0, 512);
        if (head.find("manifest=") != std::string::npos &&
            head.find(needle) == std::string::npos)
            throw config_error(path.string() +
                               " exists with a different manifest hash; use --force to replace");
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path.string());
    out << content;
}

}  // namespace sharpscope::sweep
