#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blockq {

inline constexpr std::int64_t kSatoshiPerBtc = 100'000'000;

struct BlockRecord {
    std::int64_t height;
    std::int64_t timestamp;  // unix seconds; not necessarily monotone in height
    std::int64_t tx_count;
    std::int64_t size_bytes;
};

struct TxRecord {
    std::string id;
    std::int64_t first_seen;    // unix seconds
    std::int64_t confirmed_at;  // unix seconds
    std::int64_t size_bytes;
    std::int64_t fee_satoshi;

    double confirmation_time() const { return static_cast<double>(confirmed_at - first_seen); }
};

/// H class: fee >= threshold (inclusive); L class otherwise.
struct ClassRule {
    std::int64_t threshold_satoshi = 10'000;  // 0.0001 BTC

    bool is_high(const TxRecord &tx) const { return tx.fee_satoshi >= threshold_satoshi; }
    static ClassRule from_btc(std::string_view threshold);
};

/// Parses a decimal BTC amount ("0.0001", "12", "1.5e-4" is rejected) into
/// satoshis without going through binary floating point.
std::int64_t parse_btc(std::string_view text);
std::string format_btc(std::int64_t satoshi);

struct RowError {
    std::size_t line;  // 1-based, header is line 1
    std::string message;
};

template <typename Record>
struct LoadResult {
    std::vector<Record> records;
    std::vector<RowError> errors;
};

inline constexpr std::string_view kBlocksHeader = "height,timestamp,tx_count,size_bytes";
inline constexpr std::string_view kTxsHeader = "id,first_seen,confirmed_at,size_bytes,fee_btc";

// Malformed rows are reported, not fatal, unless they exceed 1% of the
// data rows; then the whole file is rejected with parse_error.
LoadResult<BlockRecord> load_blocks(std::istream &in);
LoadResult<BlockRecord> load_blocks(const std::filesystem::path &path);
LoadResult<TxRecord> load_txs(std::istream &in);
LoadResult<TxRecord> load_txs(const std::filesystem::path &path);

struct ChainData {
    LoadResult<BlockRecord> blocks;
    LoadResult<TxRecord> txs;
};

ChainData load(const std::filesystem::path &blocks_csv, const std::filesystem::path &txs_csv);

struct Summary {
    std::size_t count;
    double mean;
    double variance;  // population
    double max;
    double min;
    double median;  // lower middle for even counts
};

Summary summarize(std::span<const double> values);

/// Successive timestamp differences in height order, clamped at 0.
std::vector<double> block_generation_times(std::span<const BlockRecord> blocks);

struct ChainSummary {
    std::optional<Summary> block_generation_time;
    std::optional<Summary> txs_per_block;
    std::optional<Summary> tx_size;
    std::optional<Summary> confirmation_time;
};

ChainSummary summarize_chain(std::span<const BlockRecord> blocks, std::span<const TxRecord> txs);

struct ClassStats {
    std::size_t count = 0;
    std::optional<double> mean_tct;
    std::optional<double> variance;
    std::optional<double> median;
    double arrival_rate = 0.0;  // per second
};

struct FeeFrequency {
    std::int64_t threshold_satoshi;  // -1 marks the trailing "all" row
    std::size_t cumulative;          // transactions with fee <= threshold
};

struct ClassBreakdown {
    ClassStats overall;
    ClassStats high;
    ClassStats low;
    std::vector<FeeFrequency> fee_frequency;
};

/// Decade thresholds 0, 1e-5 .. 10 BTC.
std::vector<std::int64_t> fee_decade_thresholds();

ClassBreakdown classify_and_rates(std::span<const TxRecord> txs, const ClassRule &rule, double span_seconds);

struct SeriesBucket {
    std::int64_t start;  // unix seconds, aligned to a multiple of the bucket width
    std::size_t high = 0;
    std::size_t low = 0;
    std::optional<double> high_share;  // absent for empty buckets
    std::optional<double> low_share;
    double high_rate = 0.0;  // per second
    double low_rate = 0.0;
};

/// Buckets by first_seen; empty buckets between the first and last are kept.
std::vector<SeriesBucket> time_series(std::span<const TxRecord> txs, const ClassRule &rule,
                                      std::int64_t bucket_seconds = 86'400);

void write_summary_csv(std::ostream &os, const ChainSummary &summary);
void write_classes_csv(std::ostream &os, const ClassBreakdown &breakdown);
void write_fee_frequency_csv(std::ostream &os, const ClassBreakdown &breakdown);
void write_time_series_csv(std::ostream &os, std::span<const SeriesBucket> series);

}  // namespace blockq
