#pragma once

#include "genrelay/rational.hpp"
#include "genrelay/topology.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genrelay {

enum class PayloadClass { prompt, original, approximation, estimate, control };
const char *payload_class_name(PayloadClass cls);

/// Which phase a message belongs to. K_L sums the learning bucket only;
/// real-time forwards and post-learning traffic are accounted separately.
enum class CostBucket { learning, probe, operational, pilot, forward };
const char *bucket_name(CostBucket bucket);

struct MessageRecord {
    std::int64_t seq = 0;
    double time = 0.0;
    std::string from;
    std::string to;
    PayloadClass cls = PayloadClass::control;
    CostBucket bucket = CostBucket::learning;
    Rational size_bits;
    std::optional<double> l_p;          // prompt size when applicable
    std::int64_t point_index = -1;      // corpus/stream index, -1 for control
};

/// Bit-exact account of every transmission. Rollups are recomputed from
/// the records, never cached, so they cannot drift from the message log.
class CostLedger {
public:
    void record(double time, std::string from, std::string to, PayloadClass cls,
                CostBucket bucket, Rational size_bits, std::optional<double> l_p = std::nullopt,
                std::int64_t point_index = -1);

    const std::vector<MessageRecord> &records() const { return records_; }

    Rational total(CostBucket bucket) const;
    Rational total_all() const;

    /// K_L: everything charged to the learning bucket.
    Rational learning_cost() const { return total(CostBucket::learning); }

    /// Per-point cost kappa_i within a bucket, keyed by point index.
    std::vector<Rational> per_point_costs(CostBucket bucket) const;

    /// Savings bookkeeping for the operational phase (w per non-pilot point).
    void record_saving(std::int64_t point_index, Rational w);
    const std::vector<std::pair<std::int64_t, Rational>> &savings() const { return savings_; }
    Rational savings_total() const;

    /// Newline-delimited JSON, one record per line, deterministic bytes.
    std::string trace_ndjson() const;

    /// Summary CSV row block: variant, n_l, n_p, kappa_bits, k_l_bits, w_bits.
    std::string summary_csv(const std::string &variant, std::int64_t n_l, std::int64_t n_p) const;

private:
    std::vector<MessageRecord> records_;
    std::vector<std::pair<std::int64_t, Rational>> savings_;
};

} // namespace genrelay
