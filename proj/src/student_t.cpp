#include "genrelay/student_t.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cstdint>
#include <cstring>
#include <map>
#include <stdexcept>

namespace genrelay {

namespace {

std::uint64_t key_bits(double x) {
    std::uint64_t b;
    std::memcpy(&b, &x, sizeof(b));
    return b;
}

} // namespace

double t_quantile(double prob, double dof) {
    if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("t_quantile: prob outside (0,1)");
    if (!(dof > 0.0)) throw std::domain_error("t_quantile: dof must be positive");
    thread_local std::map<std::pair<std::uint64_t, std::uint64_t>, double> cache;
    auto key = std::make_pair(key_bits(prob), key_bits(dof));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    boost::math::students_t_distribution<double> dist(dof);
    double q = boost::math::quantile(dist, prob);
    if (cache.size() > 4096) cache.clear();
    cache.emplace(key, q);
    return q;
}

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("normal_quantile: prob outside (0,1)");
    boost::math::normal_distribution<double> dist;
    return boost::math::quantile(dist, prob);
}

} // namespace genrelay
