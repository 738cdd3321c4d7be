#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace mlconf {

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

// Deterministic generator whose output does not depend on the standard
// library's distribution implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
    SeededRng(std::uint64_t seed, std::uint64_t stream);

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform01();
    // Uniform on [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

// Writes via a temporary sibling file and renames it into place, so readers
// never observe a truncated artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land in
// input order. The first exception (lowest index) is rethrown after all
// workers finish.
template <typename Result>
std::vector<Result> parallel_map(std::size_t n, std::size_t workers,
                                 const std::function<Result(std::size_t)>& fn) {
    std::vector<Result> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace mlconf
