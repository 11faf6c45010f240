#include "blockq/chain_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "blockq/errors.hpp"

namespace blockq {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::int64_t parse_int(std::string_view text, const char *field) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw std::invalid_argument(std::string("bad integer in ") + field + ": '" + std::string(text) + "'");
    return v;
}

template <typename Record, typename RowParser>
LoadResult<Record> load_csv(std::istream &in, std::string_view header, RowParser parse_row) {
    std::string line;
    if (!std::getline(in, line)) throw parse_error("missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw parse_error("schema mismatch: expected '" + std::string(header) + "', got '" + line + "'");

    LoadResult<Record> result;
    std::size_t lineno = 1, rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++rows;
        try {
            result.records.push_back(parse_row(split_fields(line)));
        } catch (const std::exception &e) {
            result.errors.push_back({lineno, e.what()});
        }
    }
    if (static_cast<double>(result.errors.size()) > 0.01 * static_cast<double>(rows)) {
        std::ostringstream os;
        os << result.errors.size() << " of " << rows << " rows malformed (limit 1%); first at line "
           << result.errors.front().line << ": " << result.errors.front().message;
        throw parse_error(os.str());
    }
    return result;
}

std::ifstream open_or_throw(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    return in;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt(const std::optional<double> &v) { return v ? fmt(*v) : std::string(); }

ClassStats stats_for(const std::vector<double> &tct, double span_seconds) {
    ClassStats s;
    s.count = tct.size();
    s.arrival_rate = static_cast<double>(tct.size()) / span_seconds;
    if (!tct.empty()) {
        const Summary sum = summarize(tct);
        s.mean_tct = sum.mean;
        s.variance = sum.variance;
        s.median = sum.median;
    }
    return s;
}

}  // namespace

std::int64_t parse_btc(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty fee");
    if (text.front() == '-') throw std::invalid_argument("negative fee");
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view() : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw std::invalid_argument("bad fee '" + std::string(text) + "'");
    while (frac.size() > 8 && frac.back() == '0') frac.remove_suffix(1);
    if (frac.size() > 8) throw std::invalid_argument("fee finer than one satoshi: '" + std::string(text) + "'");
    std::int64_t sat = 0;
    if (!whole.empty()) sat = parse_int(whole, "fee_btc") * kSatoshiPerBtc;
    std::int64_t scale = kSatoshiPerBtc;
    for (char c : frac) {
        if (c < '0' || c > '9') throw std::invalid_argument("bad fee '" + std::string(text) + "'");
        scale /= 10;
        sat += (c - '0') * scale;
    }
    return sat;
}

std::string format_btc(std::int64_t satoshi) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%lld.%08lld", static_cast<long long>(satoshi / kSatoshiPerBtc),
                  static_cast<long long>(satoshi % kSatoshiPerBtc));
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

ClassRule ClassRule::from_btc(std::string_view threshold) {
    const auto sat = parse_btc(threshold);
    if (sat <= 0) throw std::invalid_argument("class threshold must be positive");
    return ClassRule{sat};
}

LoadResult<BlockRecord> load_blocks(std::istream &in) {
    std::unordered_set<std::int64_t> heights;
    return load_csv<BlockRecord>(in, kBlocksHeader, [&](const std::vector<std::string_view> &f) {
        if (f.size() != 4) throw std::invalid_argument("expected 4 fields");
        BlockRecord r{parse_int(f[0], "height"), parse_int(f[1], "timestamp"), parse_int(f[2], "tx_count"),
                      parse_int(f[3], "size_bytes")};
        if (r.tx_count < 0) throw std::invalid_argument("negative tx_count");
        if (r.size_bytes < 0) throw std::invalid_argument("negative size_bytes");
        if (!heights.insert(r.height).second) throw std::invalid_argument("duplicate height");
        return r;
    });
}

LoadResult<BlockRecord> load_blocks(const std::filesystem::path &path) {
    auto in = open_or_throw(path);
    return load_blocks(in);
}

LoadResult<TxRecord> load_txs(std::istream &in) {
    return load_csv<TxRecord>(in, kTxsHeader, [](const std::vector<std::string_view> &f) {
        if (f.size() != 5) throw std::invalid_argument("expected 5 fields");
        if (f[0].empty()) throw std::invalid_argument("empty id");
        TxRecord r{std::string(f[0]), parse_int(f[1], "first_seen"), parse_int(f[2], "confirmed_at"),
                   parse_int(f[3], "size_bytes"), parse_btc(f[4])};
        if (r.confirmed_at < r.first_seen) throw std::invalid_argument("confirmed_at before first_seen");
        if (r.size_bytes <= 0) throw std::invalid_argument("size_bytes must be positive");
        return r;
    });
}

LoadResult<TxRecord> load_txs(const std::filesystem::path &path) {
    auto in = open_or_throw(path);
    return load_txs(in);
}

ChainData load(const std::filesystem::path &blocks_csv, const std::filesystem::path &txs_csv) {
    return {load_blocks(blocks_csv), load_txs(txs_csv)};
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    return {sorted.size(), mean, ss / n, sorted.back(), sorted.front(), sorted[(sorted.size() - 1) / 2]};
}

std::vector<double> block_generation_times(std::span<const BlockRecord> blocks) {
    std::vector<BlockRecord> ordered(blocks.begin(), blocks.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto &a, const auto &b) { return a.height < b.height; });
    std::vector<double> out;
    for (std::size_t i = 1; i < ordered.size(); ++i)
        out.push_back(static_cast<double>(std::max<std::int64_t>(0, ordered[i].timestamp - ordered[i - 1].timestamp)));
    return out;
}

ChainSummary summarize_chain(std::span<const BlockRecord> blocks, std::span<const TxRecord> txs) {
    ChainSummary s;
    const auto gaps = block_generation_times(blocks);
    if (!gaps.empty()) s.block_generation_time = summarize(gaps);
    if (!blocks.empty()) {
        std::vector<double> counts;
        for (const auto &b : blocks) counts.push_back(static_cast<double>(b.tx_count));
        s.txs_per_block = summarize(counts);
    }
    if (!txs.empty()) {
        std::vector<double> sizes, tct;
        for (const auto &t : txs) {
            sizes.push_back(static_cast<double>(t.size_bytes));
            tct.push_back(t.confirmation_time());
        }
        s.tx_size = summarize(sizes);
        s.confirmation_time = summarize(tct);
    }
    return s;
}

std::vector<std::int64_t> fee_decade_thresholds() {
    return {0, 1'000, 10'000, 100'000, 1'000'000, 10'000'000, 100'000'000, 1'000'000'000};
}

ClassBreakdown classify_and_rates(std::span<const TxRecord> txs, const ClassRule &rule, double span_seconds) {
    if (!(span_seconds > 0.0)) throw std::invalid_argument("span_seconds must be positive");
    if (rule.threshold_satoshi <= 0) throw std::invalid_argument("class threshold must be positive");
    std::vector<double> all, high, low;
    std::vector<std::int64_t> fees;
    for (const auto &tx : txs) {
        const double t = tx.confirmation_time();
        all.push_back(t);
        (rule.is_high(tx) ? high : low).push_back(t);
        fees.push_back(tx.fee_satoshi);
    }
    std::sort(fees.begin(), fees.end());

    ClassBreakdown out{stats_for(all, span_seconds), stats_for(high, span_seconds), stats_for(low, span_seconds), {}};
    for (std::int64_t threshold : fee_decade_thresholds()) {
        const auto n = std::upper_bound(fees.begin(), fees.end(), threshold) - fees.begin();
        out.fee_frequency.push_back({threshold, static_cast<std::size_t>(n)});
    }
    out.fee_frequency.push_back({-1, fees.size()});
    return out;
}

std::vector<SeriesBucket> time_series(std::span<const TxRecord> txs, const ClassRule &rule,
                                      std::int64_t bucket_seconds) {
    if (bucket_seconds <= 0) throw std::invalid_argument("bucket width must be positive");
    if (txs.empty()) return {};
    auto floor_div = [](std::int64_t a, std::int64_t d) { return a / d - ((a % d != 0) && ((a < 0) != (d < 0))); };
    std::int64_t lo = txs.front().first_seen, hi = lo;
    for (const auto &tx : txs) {
        lo = std::min(lo, tx.first_seen);
        hi = std::max(hi, tx.first_seen);
    }
    const std::int64_t first = floor_div(lo, bucket_seconds);
    const std::int64_t last = floor_div(hi, bucket_seconds);
    std::vector<SeriesBucket> series(static_cast<std::size_t>(last - first + 1));
    for (std::size_t i = 0; i < series.size(); ++i)
        series[i].start = (first + static_cast<std::int64_t>(i)) * bucket_seconds;
    for (const auto &tx : txs) {
        auto &bucket = series[static_cast<std::size_t>(floor_div(tx.first_seen, bucket_seconds) - first)];
        ++(rule.is_high(tx) ? bucket.high : bucket.low);
    }
    const double width = static_cast<double>(bucket_seconds);
    for (auto &bucket : series) {
        const std::size_t total = bucket.high + bucket.low;
        if (total > 0) {
            bucket.high_share = static_cast<double>(bucket.high) / static_cast<double>(total);
            bucket.low_share = static_cast<double>(bucket.low) / static_cast<double>(total);
        }
        bucket.high_rate = static_cast<double>(bucket.high) / width;
        bucket.low_rate = static_cast<double>(bucket.low) / width;
    }
    return series;
}

void write_summary_csv(std::ostream &os, const ChainSummary &summary) {
    os << "metric,count,mean,variance,max,min,median\n";
    auto row = [&](const char *name, const std::optional<Summary> &s) {
        if (!s) return;
        os << name << ',' << s->count << ',' << fmt(s->mean) << ',' << fmt(s->variance) << ',' << fmt(s->max) << ','
           << fmt(s->min) << ',' << fmt(s->median) << '\n';
    };
    row("block_generation_time_s", summary.block_generation_time);
    row("txs_per_block", summary.txs_per_block);
    row("tx_size_bytes", summary.tx_size);
    row("confirmation_time_s", summary.confirmation_time);
}

void write_classes_csv(std::ostream &os, const ClassBreakdown &breakdown) {
    os << "class,count,mean_tct_s,variance,median,arrival_rate_per_s\n";
    auto row = [&](const char *name, const ClassStats &s) {
        os << name << ',' << s.count << ',' << fmt(s.mean_tct) << ',' << fmt(s.variance) << ',' << fmt(s.median)
           << ',' << fmt(s.arrival_rate) << '\n';
    };
    row("all", breakdown.overall);
    row("H", breakdown.high);
    row("L", breakdown.low);
}

void write_fee_frequency_csv(std::ostream &os, const ClassBreakdown &breakdown) {
    os << "fee_btc,cumulative_count\n";
    for (const auto &f : breakdown.fee_frequency)
        os << (f.threshold_satoshi < 0 ? std::string("all") : format_btc(f.threshold_satoshi)) << ',' << f.cumulative
           << '\n';
}

void write_time_series_csv(std::ostream &os, std::span<const SeriesBucket> series) {
    os << "bucket_start,h_count,l_count,h_share,l_share,h_rate_per_s,l_rate_per_s\n";
    for (const auto &b : series)
        os << b.start << ',' << b.high << ',' << b.low << ',' << fmt(b.high_share) << ',' << fmt(b.low_share) << ','
           << fmt(b.high_rate) << ',' << fmt(b.low_rate) << '\n';
}

}  // namespace blockq
