#include "dlma/metrics.hpp"

#include <numeric>
#include <stdexcept>

namespace dlma::harness {

std::optional<double> short_term_throughput(std::span<const std::uint8_t> rewards, std::int64_t t,
                                            int n) {
    if (n < 1) throw std::invalid_argument("short_term_throughput: window must be >= 1");
    if (t > static_cast<std::int64_t>(rewards.size()))
        throw std::invalid_argument("short_term_throughput: t exceeds the recorded series");
    if (t < n) return std::nullopt;
    std::int64_t sum = 0;
    for (std::int64_t i = t - n; i < t; ++i) sum += rewards[static_cast<std::size_t>(i)];
    return static_cast<double>(sum) / n;
}

std::optional<double> cumulative_throughput(std::span<const std::uint8_t> rewards, std::int64_t t) {
    if (t > static_cast<std::int64_t>(rewards.size()))
        throw std::invalid_argument("cumulative_throughput: t exceeds the recorded series");
    if (t < 1) return std::nullopt;
    std::int64_t sum = 0;
    for (std::int64_t i = 0; i < t; ++i) sum += rewards[static_cast<std::size_t>(i)];
    return static_cast<double>(sum) / static_cast<double>(t);
}

std::vector<std::uint8_t> channel_series(const MetricsRecord& metrics) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(metrics.slots), 0);
    for (const auto& row : metrics.success)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(out[i] + row[i]);
    return out;
}

}  // namespace dlma::harness
