#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace datagen {

std::uint64_t fnv1a64(std::string_view data);

/// 16 lowercase hex digits of fnv1a64.
std::string hash_hex(std::string_view data);

/// splitmix64 finalizer over (base, stream); used to derive independent RNG streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(derive_seed(seed, stream)); }

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals_ascii(std::string_view a, std::string_view b);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Whitespace-separated word count (ASCII whitespace).
std::size_t word_count(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Parses a plain number, tolerating thousands separators, a leading currency sign,
/// a trailing percent sign or period. Returns nullopt on anything else.
std::optional<double> parse_number(std::string_view s);

std::string read_file(const std::filesystem::path &path);
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

/// Runs fn(i) for i in [0, n) on up to `workers` threads; results are returned in index order.
/// The first exception thrown by any task is rethrown after all workers join.
template <typename Fn>
auto parallel_map(std::size_t n, int workers, Fn &&fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using T = decltype(fn(std::size_t{}));
    std::vector<std::optional<T>> slots(n);
    std::size_t thread_count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (thread_count <= 1) {
        std::vector<T> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(fn(i));
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(thread_count);
        for (std::size_t t = 0; t < thread_count; ++t) {
            threads.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        slots[i].emplace(fn(i));
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    std::vector<T> out;
    out.reserve(n);
    for (auto &slot : slots)
        out.push_back(std::move(*slot));
    return out;
}

} // namespace datagen
