#include "genrelay/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace genrelay {

DataPoint DataPoint::from_image(std::int64_t id, Image img, std::optional<int> label) {
    if (img.pixels.empty() || img.width <= 0 || img.height <= 0) {
        throw std::invalid_argument("DataPoint requires a non-empty pixel grid");
    }
    DataPoint p;
    p.id = id;
    p.size_bits = Rational(img.pixel_count() * img.depth_bits);
    p.payload = std::move(img);
    p.label = label;
    return p;
}

void write_pgm(const Image &img, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::file_unreadable, "cannot open " + path + " for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    int shift = img.depth_bits > 8 ? img.depth_bits - 8 : 0;
    for (std::uint16_t v : img.pixels) {
        out.put(static_cast<char>((v >> shift) & 0xff));
    }
}

namespace {

double pixel_distance(const Image &a, const Image &b, DistanceFamily metric) {
    double acc = 0.0;
    const std::size_t n = a.pixels.size();
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        acc += metric == DistanceFamily::mse ? d * d : std::abs(d);
    }
    return acc / static_cast<double>(n);
}

} // namespace

QualityValue quality_deviation(const DataPoint &x, const Approximation &xhat,
                               DistanceFamily metric, double q_cap) {
    if (!x.payload.same_shape(xhat.payload)) {
        raise(Errc::shape_mismatch, "quality_deviation: payload shapes differ");
    }
    double delta = pixel_distance(x.payload, xhat.payload, metric);
    QualityValue q;
    q.kind = MetricKind::deviation;
    q.underlying_distance = delta;
    q.value = delta > 0.0 ? std::min(1.0 / delta, q_cap) : q_cap;
    return q;
}

int brightest_quadrant(const Image &img) {
    const int hw = img.width / 2;
    const int hh = img.height / 2;
    double sums[4] = {0, 0, 0, 0};
    std::int64_t counts[4] = {0, 0, 0, 0};
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            int quad = (r < hh ? 0 : 2) + (c < hw ? 0 : 1);
            sums[quad] += img.at(r, c);
            counts[quad] += 1;
        }
    }
    int best = 0;
    double best_mean = -1.0;
    for (int q = 0; q < 4; ++q) {
        double mean = counts[q] > 0 ? sums[q] / counts[q] : 0.0;
        if (mean > best_mean) {
            best_mean = mean;
            best = q;
        }
    }
    return best;
}

QualityValue quality_goal(const Approximation &xhat, const DataPoint &original) {
    if (!original.label.has_value()) raise(Errc::missing_label, "goal-oriented quality needs a labeled data point");
    if (xhat.payload.pixels.empty()) raise(Errc::shape_mismatch, "quality_goal: approximation carries no payload");
    QualityValue q;
    q.kind = MetricKind::goal;
    q.value = brightest_quadrant(xhat.payload) == *original.label ? 1.0 : kGoalQualityFloor;
    return q;
}

std::int64_t swap_count(double fraction, std::int64_t pixel_count) {
    return std::llround(fraction * static_cast<double>(pixel_count));
}

std::vector<std::int64_t> swap_indices(std::int64_t pixel_count, std::int64_t count, std::uint64_t seed) {
    count = std::clamp<std::int64_t>(count, 0, pixel_count);
    std::vector<std::int64_t> pool(static_cast<std::size_t>(pixel_count));
    for (std::int64_t i = 0; i < pixel_count; ++i) pool[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    // Partial Fisher-Yates: the first `count` entries are a uniform draw
    // without replacement.
    for (std::int64_t i = 0; i < count; ++i) {
        std::int64_t j = rng.uniform_int(i, pixel_count - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

Approximation pixel_swap(const Approximation &generated, const DataPoint &original,
                         double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("pixel_swap: fraction outside [0,1]");
    }
    if (!generated.payload.same_shape(original.payload)) {
        raise(Errc::shape_mismatch, "pixel_swap: payload shapes differ");
    }
    Approximation out = generated;
    const std::int64_t p = original.payload.pixel_count();
    for (std::int64_t idx : swap_indices(p, swap_count(fraction, p), seed)) {
        out.payload.pixels[static_cast<std::size_t>(idx)] = original.payload.pixels[static_cast<std::size_t>(idx)];
    }
    return out;
}

QualityValue sample_quality(const SyntheticRQLaw &law, double l_p, std::uint64_t seed) {
    if (!(l_p > 0.0)) throw std::invalid_argument("sample_quality: L_p must be positive");
    Rng rng(seed);
    QualityValue q;
    q.kind = MetricKind::deviation;
    q.value = law.sample(l_p, rng);
    return q;
}

// --- ToyCodec ---------------------------------------------------------

ToyCodec::ToyCodec(std::vector<ToyVariant> variants, int depth_bits, DistanceFamily metric,
                   double generation_time_s, double q_cap)
    : variants_(std::move(variants)), depth_bits_(depth_bits), metric_(metric), q_cap_(q_cap) {
    if (variants_.empty()) throw std::invalid_argument("ToyCodec needs at least one variant");
    descriptor_.family = CodecFamily::toy_image;
    descriptor_.modality = "image";
    descriptor_.supports_augmented_generation = true;
    descriptor_.generation_time_s = generation_time_s;
    Rational min_base(INT64_MAX), max_base(0);
    for (const auto &v : variants_) {
        if (v.factor_x <= 0 || v.factor_y <= 0) throw std::invalid_argument("variant factors must be positive");
        Rational base(depth_bits_, static_cast<std::int64_t>(v.factor_x) * v.factor_y);
        min_base = std::min(min_base, base);
        max_base = std::max(max_base, base);
        descriptor_.variants.push_back(v.name);
    }
    descriptor_.l_min_bpp = min_base;
    descriptor_.l_max_bpp = max_base + Rational(depth_bits_);
}

std::shared_ptr<ToyCodec> ToyCodec::standard(int depth_bits, double generation_time_s) {
    return std::make_shared<ToyCodec>(
        std::vector<ToyVariant>{{"ds2", 2, 2}, {"ds4", 4, 4}, {"ds8", 8, 8}}, depth_bits,
        DistanceFamily::mse, generation_time_s);
}

std::pair<Rational, Rational> ToyCodec::supported_range(const std::string &name) const {
    const ToyVariant &v = variant(name);
    Rational base(depth_bits_, static_cast<std::int64_t>(v.factor_x) * v.factor_y);
    return {base, base + Rational(depth_bits_)};
}

const ToyVariant &ToyCodec::variant(const std::string &name) const {
    for (const auto &v : variants_) {
        if (v.name == name) return v;
    }
    raise(Errc::unsupported_variant, "toy codec has no variant '" + name + "'");
}

Rational ToyCodec::base_latent_bpp(const std::string &name, int width, int height) const {
    const ToyVariant &v = variant(name);
    std::int64_t lw = (width + v.factor_x - 1) / v.factor_x;
    std::int64_t lh = (height + v.factor_y - 1) / v.factor_y;
    return Rational(lw * lh * depth_bits_, static_cast<std::int64_t>(width) * height);
}

Prompt ToyCodec::encode(const DataPoint &x, const Rational &target_bpp, const std::string &name,
                        std::uint64_t seed) const {
    const ToyVariant &v = variant(name);
    if (target_bpp < descriptor_.l_min_bpp) {
        raise(Errc::prompt_too_small, "target " + target_bpp.str() + " bpp below codec minimum " +
                                          descriptor_.l_min_bpp.str());
    }
    const Image &img = x.payload;
    Rational base = base_latent_bpp(name, img.width, img.height);
    if (target_bpp < base) {
        raise(Errc::prompt_too_small,
              "target " + target_bpp.str() + " bpp below variant '" + name + "' base " + base.str());
    }
    const std::int64_t p = img.pixel_count();
    Rational fraction = (target_bpp - base) / Rational(depth_bits_);
    if (fraction > Rational(1)) fraction = Rational(1);
    // round(fraction * P), half away from zero, in exact arithmetic
    std::int64_t n_aug = (fraction * Rational(2 * p) + Rational(1)).floor() / 2;
    n_aug = std::clamp<std::int64_t>(n_aug, 0, p);

    Prompt prompt;
    prompt.source_id = x.id;
    prompt.variant = name;
    prompt.rng_seed = seed;
    prompt.original_width = img.width;
    prompt.original_height = img.height;
    prompt.original_depth = img.depth_bits;
    prompt.augmentation_fraction = Rational(n_aug, p);
    prompt.size_bpp = base + Rational(n_aug * depth_bits_, p);

    int lw = (img.width + v.factor_x - 1) / v.factor_x;
    int lh = (img.height + v.factor_y - 1) / v.factor_y;
    prompt.latent.width = lw;
    prompt.latent.height = lh;
    prompt.latent.depth_bits = img.depth_bits;
    prompt.latent.pixels.resize(static_cast<std::size_t>(lw) * lh);
    for (int r = 0; r < lh; ++r) {
        for (int c = 0; c < lw; ++c) {
            prompt.latent.at(r, c) = img.at(r * v.factor_y, c * v.factor_x);
        }
    }
    for (std::int64_t idx : swap_indices(p, n_aug, seed)) {
        prompt.carried_pixels.push_back(img.pixels[static_cast<std::size_t>(idx)]);
    }
    return prompt;
}

Approximation ToyCodec::generate(const Prompt &p) const {
    const ToyVariant &v = variant(p.variant); // raises UnsupportedVariant for foreign prompts
    int lw = (p.original_width + v.factor_x - 1) / v.factor_x;
    int lh = (p.original_height + v.factor_y - 1) / v.factor_y;
    if (p.latent.width != lw || p.latent.height != lh || p.latent.pixels.empty()) {
        raise(Errc::variant_mismatch, "prompt latent does not match variant '" + p.variant + "'");
    }
    Approximation out;
    out.source_id = p.source_id;
    out.generating_prompt_size_bpp = p.size_bpp.to_double();
    out.payload.width = p.original_width;
    out.payload.height = p.original_height;
    out.payload.depth_bits = p.original_depth;
    out.payload.pixels.resize(static_cast<std::size_t>(p.original_width) * p.original_height);
    for (int r = 0; r < p.original_height; ++r) {
        for (int c = 0; c < p.original_width; ++c) {
            out.payload.at(r, c) = p.latent.at(r / v.factor_y, c / v.factor_x);
        }
    }
    const std::int64_t pix = out.payload.pixel_count();
    auto indices = swap_indices(pix, static_cast<std::int64_t>(p.carried_pixels.size()), p.rng_seed);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.payload.pixels[static_cast<std::size_t>(indices[i])] = p.carried_pixels[i];
    }
    // Generated output is full-size content: |x_hat| = |x|.
    out.size_bits = Rational(pix * p.original_depth);
    return out;
}

QualityValue ToyCodec::measure(const DataPoint &x, const Approximation &xhat, MetricKind kind) const {
    if (kind == MetricKind::goal) return quality_goal(xhat, x);
    return quality_deviation(x, xhat, metric_, q_cap_);
}

Approximation ToyCodec::augment(const Approximation &base, const DataPoint &original,
                                const Rational &target_bpp, const std::string &name,
                                std::uint64_t seed) const {
    if (!base.payload.same_shape(original.payload)) {
        raise(Errc::shape_mismatch, "augment: payload shapes differ");
    }
    Rational var_base = base_latent_bpp(name, original.payload.width, original.payload.height);
    if (target_bpp < var_base) {
        raise(Errc::prompt_too_small, "augment target below variant base size");
    }
    Rational fraction = (target_bpp - var_base) / Rational(depth_bits_);
    if (fraction > Rational(1)) fraction = Rational(1);
    const std::int64_t p = original.payload.pixel_count();
    std::int64_t n_aug = (fraction * Rational(2 * p) + Rational(1)).floor() / 2;
    n_aug = std::clamp<std::int64_t>(n_aug, 0, p);
    Approximation out = base;
    for (std::int64_t idx : swap_indices(p, n_aug, seed)) {
        out.payload.pixels[static_cast<std::size_t>(idx)] =
            original.payload.pixels[static_cast<std::size_t>(idx)];
    }
    out.generating_prompt_size_bpp = (var_base + fraction * Rational(depth_bits_)).to_double();
    return out;
}

// --- SyntheticCodec ---------------------------------------------------

SyntheticCodec::SyntheticCodec(SyntheticRQLaw law, Rational l_min_bpp, Rational l_max_bpp,
                               std::int64_t nominal_pixels, Rational original_bpp,
                               double generation_time_s)
    : law_(law), nominal_pixels_(nominal_pixels), original_bpp_(original_bpp) {
    descriptor_.family = CodecFamily::synthetic;
    descriptor_.modality = "synthetic";
    descriptor_.l_min_bpp = l_min_bpp;
    descriptor_.l_max_bpp = l_max_bpp;
    descriptor_.supports_augmented_generation = true;
    descriptor_.generation_time_s = generation_time_s;
    descriptor_.variants = {"law"};
}

Prompt SyntheticCodec::encode(const DataPoint &x, const Rational &target_bpp,
                              const std::string &variant, std::uint64_t seed) const {
    if (variant != "law") raise(Errc::unsupported_variant, "synthetic codec variant '" + variant + "'");
    if (target_bpp < descriptor_.l_min_bpp) {
        raise(Errc::prompt_too_small, "target " + target_bpp.str() + " bpp below codec minimum " +
                                          descriptor_.l_min_bpp.str());
    }
    Prompt p;
    p.source_id = x.id;
    p.size_bpp = target_bpp;
    p.variant = variant;
    p.rng_seed = seed;
    p.original_width = static_cast<int>(nominal_pixels_);
    p.original_height = 1;
    p.original_depth = 0;
    return p;
}

Approximation SyntheticCodec::generate(const Prompt &p) const {
    if (p.variant != "law") raise(Errc::variant_mismatch, "prompt was not produced by the synthetic codec");
    Rng rng(p.rng_seed);
    Approximation out;
    out.source_id = p.source_id;
    out.generating_prompt_size_bpp = p.size_bpp.to_double();
    out.sampled_quality = law_.sample(p.size_bpp.to_double(), rng);
    out.size_bits = original_bpp_ * Rational(nominal_pixels_);
    return out;
}

Approximation SyntheticCodec::augment(const Approximation &base, const DataPoint &original,
                                      const Rational &target_bpp, const std::string &variant,
                                      std::uint64_t seed) const {
    if (variant != "law") raise(Errc::unsupported_variant, "synthetic codec variant '" + variant + "'");
    if (target_bpp < descriptor_.l_min_bpp) {
        raise(Errc::prompt_too_small, "augment target below codec minimum");
    }
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(target_bpp.num()),
                               static_cast<std::uint64_t>(target_bpp.den())}));
    Approximation out = base;
    out.source_id = original.id;
    out.generating_prompt_size_bpp = target_bpp.to_double();
    out.sampled_quality = law_.sample(target_bpp.to_double(), rng);
    return out;
}

QualityValue SyntheticCodec::measure(const DataPoint &, const Approximation &xhat, MetricKind) const {
    if (!xhat.sampled_quality.has_value()) {
        raise(Errc::variant_mismatch, "approximation was not produced by the synthetic codec");
    }
    QualityValue q;
    q.kind = MetricKind::deviation;
    q.value = *xhat.sampled_quality;
    return q;
}

Corpus SyntheticCodec::nominal_corpus(std::int64_t count) const {
    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        DataPoint p;
        p.id = i;
        p.size_bits = original_bpp_ * Rational(nominal_pixels_);
        p.payload.width = static_cast<int>(nominal_pixels_);
        p.payload.height = 1;
        p.payload.depth_bits = 0;
        corpus.push_back(std::move(p));
    }
    return corpus;
}

Corpus make_synthetic_corpus(int count, int width, int height, int depth_bits, std::uint64_t seed) {
    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(count));
    const double max_val = static_cast<double>((1u << depth_bits) - 1);
    for (int n = 0; n < count; ++n) {
        Rng rng(derive_seed(seed, {0xc0ULL, static_cast<std::uint64_t>(n)}));
        Image img;
        img.width = width;
        img.height = height;
        img.depth_bits = depth_bits;
        img.pixels.resize(static_cast<std::size_t>(width) * height);
        double gx = rng.uniform(-1.0, 1.0) * max_val / width;
        double gy = rng.uniform(-1.0, 1.0) * max_val / height;
        double offset = rng.uniform(0.2, 0.8) * max_val;
        double noise_amp = rng.uniform(0.05, 0.35) * max_val;
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) {
                double v = offset + gx * c + gy * r + noise_amp * (rng.uniform01() - 0.5);
                img.at(r, c) = static_cast<std::uint16_t>(std::clamp(v, 0.0, max_val));
            }
        }
        int label = brightest_quadrant(img);
        corpus.push_back(DataPoint::from_image(n, std::move(img), label));
    }
    return corpus;
}

} // namespace genrelay
