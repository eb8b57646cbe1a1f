#include "genrelay/ledger.hpp"

#include "genrelay/format.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace genrelay {

const char *payload_class_name(PayloadClass cls) {
    switch (cls) {
    case PayloadClass::prompt: return "prompt";
    case PayloadClass::original: return "original";
    case PayloadClass::approximation: return "approximation";
    case PayloadClass::estimate: return "estimate";
    case PayloadClass::control: return "control";
    }
    return "?";
}

const char *bucket_name(CostBucket bucket) {
    switch (bucket) {
    case CostBucket::learning: return "learning";
    case CostBucket::probe: return "probe";
    case CostBucket::operational: return "operational";
    case CostBucket::pilot: return "pilot";
    case CostBucket::forward: return "forward";
    }
    return "?";
}

void CostLedger::record(double time, std::string from, std::string to, PayloadClass cls,
                        CostBucket bucket, Rational size_bits, std::optional<double> l_p,
                        std::int64_t point_index) {
    MessageRecord rec;
    rec.seq = static_cast<std::int64_t>(records_.size());
    rec.time = time;
    rec.from = std::move(from);
    rec.to = std::move(to);
    rec.cls = cls;
    rec.bucket = bucket;
    rec.size_bits = std::move(size_bits);
    rec.l_p = l_p;
    rec.point_index = point_index;
    records_.push_back(std::move(rec));
}

Rational CostLedger::total(CostBucket bucket) const {
    Rational sum;
    for (const auto &r : records_) {
        if (r.bucket == bucket) sum += r.size_bits;
    }
    return sum;
}

Rational CostLedger::total_all() const {
    Rational sum;
    for (const auto &r : records_) sum += r.size_bits;
    return sum;
}

std::vector<Rational> CostLedger::per_point_costs(CostBucket bucket) const {
    std::map<std::int64_t, Rational> by_point;
    for (const auto &r : records_) {
        if (r.bucket == bucket && r.point_index >= 0) by_point[r.point_index] += r.size_bits;
    }
    std::vector<Rational> out;
    out.reserve(by_point.size());
    for (auto &[idx, cost] : by_point) out.push_back(cost);
    return out;
}

void CostLedger::record_saving(std::int64_t point_index, Rational w) {
    savings_.emplace_back(point_index, std::move(w));
}

Rational CostLedger::savings_total() const {
    Rational sum;
    for (const auto &[idx, w] : savings_) sum += w;
    return sum;
}

std::string CostLedger::trace_ndjson() const {
    std::ostringstream out;
    for (const auto &r : records_) {
        out << "{\"seq\":" << r.seq << ",\"t\":" << fmt_double(r.time) << ",\"from\":\"" << r.from
            << "\",\"to\":\"" << r.to << "\",\"class\":\"" << payload_class_name(r.cls)
            << "\",\"bucket\":\"" << bucket_name(r.bucket)
            << "\",\"bits\":" << fmt_double(r.size_bits.to_double());
        if (r.l_p.has_value()) out << ",\"l_p\":" << fmt_double(*r.l_p);
        if (r.point_index >= 0) out << ",\"point\":" << r.point_index;
        out << "}\n";
    }
    return out.str();
}

std::string CostLedger::summary_csv(const std::string &variant, std::int64_t n_l,
                                    std::int64_t n_p) const {
    std::ostringstream out;
    out << "variant,n_l,n_p,kappa_bits,k_l_bits,w_bits\n";
    Rational k_l = learning_cost();
    Rational kappa = n_l > 0 ? k_l / Rational(n_l) : Rational(0);
    out << variant << "," << n_l << "," << n_p << "," << fmt_double(kappa.to_double()) << ","
        << fmt_double(k_l.to_double()) << "," << fmt_double(savings_total().to_double()) << "\n";
    return out.str();
}

} // namespace genrelay
