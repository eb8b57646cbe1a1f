#pragma once

#include "genrelay/errors.hpp"
#include "genrelay/image.hpp"
#include "genrelay/rational.hpp"
#include "genrelay/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace genrelay {

/// A single piece of content to transmit: pixel payload plus bookkeeping.
struct DataPoint {
    std::int64_t id = 0;
    Image payload;
    Rational size_bits;            // |x_n|; width*height*depth for pixel payloads
    std::optional<int> label;      // quadrant index for the goal-oriented task

    static DataPoint from_image(std::int64_t id, Image img, std::optional<int> label = std::nullopt);
};

using Corpus = std::vector<DataPoint>;

/// Compact encoded representation sent in place of the original.
struct Prompt {
    std::int64_t source_id = 0;
    Rational size_bpp;                   // L_p
    std::string variant;                 // codec variant tag (theta)
    Rational augmentation_fraction;      // fraction of original pixels carried
    std::uint64_t rng_seed = 0;
    // Latent payload: downsampled grid for the toy codec; empty for the
    // synthetic codec where only size matters.
    Image latent;
    std::vector<std::uint16_t> carried_pixels; // original values, swap-index order
    int original_width = 0;
    int original_height = 0;
    int original_depth = 0;

    Rational size_bits() const {
        return size_bpp * Rational(static_cast<std::int64_t>(original_width) * original_height);
    }
};

/// Regenerated content. For the synthetic codec the payload is empty and
/// sampled_quality carries the draw from the quality law.
struct Approximation {
    std::int64_t source_id = 0;
    Image payload;
    double generating_prompt_size_bpp = 0.0;
    Rational size_bits; // |x_hat|
    std::optional<double> sampled_quality;
};

enum class MetricKind { deviation, goal };

enum class DistanceFamily { mse, mae };

/// Unified quality: higher is better for both metric families.
struct QualityValue {
    double value = 0.0;                          // Q
    MetricKind kind = MetricKind::deviation;
    std::optional<double> underlying_distance;   // delta, for deviation-based
};

inline constexpr double kDefaultQualityCap = 1000.0; // Q at delta = 0
inline constexpr double kGoalQualityFloor = 1e-6;    // epsilon floor so 1/Q stays finite

/// Q = 1/delta capped at q_cap; delta = 0 maps to the cap.
QualityValue quality_deviation(const DataPoint &x, const Approximation &xhat,
                               DistanceFamily metric = DistanceFamily::mse,
                               double q_cap = kDefaultQualityCap);

/// Brightest-quadrant task rule: 1.0 on success, the epsilon floor otherwise.
QualityValue quality_goal(const Approximation &xhat, const DataPoint &original);

/// Quadrant (0..3, row-major) with the highest mean intensity; ties go to
/// the lowest index.
int brightest_quadrant(const Image &img);

/// Replaces round(fraction * pixel_count) pixels of `generated` with the
/// original values at positions drawn uniformly without replacement from a
/// seeded generator. Index positions derive from the seed alone, so they
/// cost nothing on the wire.
Approximation pixel_swap(const Approximation &generated, const DataPoint &original,
                         double fraction, std::uint64_t seed);

/// Number of pixels carried for a given fraction (round half up).
std::int64_t swap_count(double fraction, std::int64_t pixel_count);

/// The seeded index permutation prefix shared by encoder and generator.
std::vector<std::int64_t> swap_indices(std::int64_t pixel_count, std::int64_t count, std::uint64_t seed);

/// Ground-truth rate-quality law for the synthetic codec:
/// mean(L) = q_max * (1 - exp(-beta L)), sd(L) = sigma0 * exp(-gamma L).
struct SyntheticRQLaw {
    double q_max = 10.0;
    double beta = 1.0;
    double sigma0 = 0.0;
    double gamma = 0.0;

    double mean(double l_p) const { return q_max * (1.0 - std::exp(-beta * l_p)); }
    double sd(double l_p) const { return sigma0 * std::exp(-gamma * l_p); }

    /// Quality draw at prompt size l_p, clamped below at the epsilon floor.
    double sample(double l_p, Rng &rng) const {
        return sample_with_z(l_p, rng.normal());
    }
    /// Same draw expressed through a pre-drawn standard normal; used for
    /// common random numbers across budget levels.
    double sample_with_z(double l_p, double z) const {
        double q = mean(l_p) + sd(l_p) * z;
        return q < kGoalQualityFloor ? kGoalQualityFloor : q;
    }
};

/// Pure-function form of the law draw (deterministic per seed).
QualityValue sample_quality(const SyntheticRQLaw &law, double l_p, std::uint64_t seed);

struct ToyVariant {
    std::string name;
    int factor_x = 2;
    int factor_y = 2;
};

enum class CodecFamily { synthetic, toy_image };

struct CodecDescriptor {
    CodecFamily family = CodecFamily::toy_image;
    std::string modality = "image";
    Rational l_min_bpp;            // smallest supported prompt size
    Rational l_max_bpp;            // largest supported prompt size
    bool supports_augmented_generation = false;
    double generation_time_s = 0.0; // T_G
    std::vector<std::string> variants;
};

/// Prompt encoder / approximation generator pair behind the protocol
/// engine. Implementations are pure given the seeds carried in prompts.
class Codec {
public:
    virtual ~Codec() = default;

    virtual const CodecDescriptor &descriptor() const = 0;

    /// Builds a prompt of size within one quantization step of target_bpp.
    virtual Prompt encode(const DataPoint &x, const Rational &target_bpp,
                          const std::string &variant, std::uint64_t seed) const = 0;

    virtual Approximation generate(const Prompt &p) const = 0;

    /// Quality of an approximation measured at any site.
    virtual QualityValue measure(const DataPoint &x, const Approximation &xhat,
                                 MetricKind kind) const = 0;

    /// Approximation size used for cost accounting (|x_hat|).
    virtual Rational approximation_bits(const DataPoint &x) const = 0;

    /// Default variant used when a contract does not pin one.
    virtual std::string default_variant() const = 0;

    /// Supported prompt-size range for one variant; defaults to the
    /// codec-level range.
    virtual std::pair<Rational, Rational> supported_range(const std::string &variant) const {
        (void)variant;
        return {descriptor().l_min_bpp, descriptor().l_max_bpp};
    }

    /// Node-local augmented generation: extends a base approximation to the
    /// quality of a larger prompt size using the received original.
    virtual Approximation augment(const Approximation &base, const DataPoint &original,
                                  const Rational &target_bpp, const std::string &variant,
                                  std::uint64_t seed) const {
        (void)base;
        (void)original;
        (void)target_bpp;
        (void)variant;
        (void)seed;
        raise(Errc::unsupported_variant, "codec does not support augmented generation");
    }
};

/// Deterministic downsample/upsample codec with pixel-swap augmentation.
/// Variant (fx, fy) subsamples every fx-th column and fy-th row; generate
/// upsamples by nearest neighbor and swaps in the carried original pixels.
class ToyCodec : public Codec {
public:
    ToyCodec(std::vector<ToyVariant> variants, int depth_bits,
             DistanceFamily metric = DistanceFamily::mse, double generation_time_s = 0.0,
             double q_cap = kDefaultQualityCap);

    /// The paper-style three-variant ladder: 2x, 4x, 8x downsampling.
    static std::shared_ptr<ToyCodec> standard(int depth_bits = 8, double generation_time_s = 0.0);

    const CodecDescriptor &descriptor() const override { return descriptor_; }
    Prompt encode(const DataPoint &x, const Rational &target_bpp, const std::string &variant,
                  std::uint64_t seed) const override;
    Approximation generate(const Prompt &p) const override;
    QualityValue measure(const DataPoint &x, const Approximation &xhat,
                         MetricKind kind) const override;
    Rational approximation_bits(const DataPoint &x) const override { return x.size_bits; }
    std::string default_variant() const override { return variants_.front().name; }

    Approximation augment(const Approximation &base, const DataPoint &original,
                          const Rational &target_bpp, const std::string &variant,
                          std::uint64_t seed) const override;

    /// [nominal variant base, base + depth]: the sizes this variant can hit.
    std::pair<Rational, Rational> supported_range(const std::string &variant) const override;

    /// Exact base latent size in bpp for a variant on a given shape.
    Rational base_latent_bpp(const std::string &variant, int width, int height) const;

    const ToyVariant &variant(const std::string &name) const;

private:
    std::vector<ToyVariant> variants_;
    int depth_bits_;
    DistanceFamily metric_;
    double q_cap_;
    CodecDescriptor descriptor_;
};

/// Payload-free codec producing quality draws from a SyntheticRQLaw.
/// Prompt and approximation sizes are nominal (configured pixel count).
class SyntheticCodec : public Codec {
public:
    SyntheticCodec(SyntheticRQLaw law, Rational l_min_bpp, Rational l_max_bpp,
                   std::int64_t nominal_pixels, Rational original_bpp,
                   double generation_time_s = 0.0);

    const CodecDescriptor &descriptor() const override { return descriptor_; }
    Prompt encode(const DataPoint &x, const Rational &target_bpp, const std::string &variant,
                  std::uint64_t seed) const override;
    Approximation generate(const Prompt &p) const override;
    QualityValue measure(const DataPoint &x, const Approximation &xhat,
                         MetricKind kind) const override;
    Rational approximation_bits(const DataPoint &x) const override { return x.size_bits; }
    std::string default_variant() const override { return "law"; }

    /// The node holds the original during node-oriented learning, so it can
    /// produce the remaining grid sizes locally: a fresh law draw at the
    /// target size.
    Approximation augment(const Approximation &base, const DataPoint &original,
                          const Rational &target_bpp, const std::string &variant,
                          std::uint64_t seed) const override;

    const SyntheticRQLaw &law() const { return law_; }
    std::int64_t nominal_pixels() const { return nominal_pixels_; }
    Rational original_bpp() const { return original_bpp_; }

    /// A corpus of payload-free points with the nominal size.
    Corpus nominal_corpus(std::int64_t count) const;

private:
    SyntheticRQLaw law_;
    std::int64_t nominal_pixels_;
    Rational original_bpp_;
    CodecDescriptor descriptor_;
};

/// Seeded synthetic image corpus: smooth ramps plus textured noise, labeled
/// by the brightest-quadrant rule on the original.
Corpus make_synthetic_corpus(int count, int width, int height, int depth_bits, std::uint64_t seed);

} // namespace genrelay
