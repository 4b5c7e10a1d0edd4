#pragma once

#include "roughdrift/box.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roughdrift {

/// Integrability exponents (p in space, q in time) of a mixed Lebesgue norm.
struct Exponents {
    double p = 7.0;
    double q = 15.0;
};

struct ProdiSerrin {
    bool admissible = false;
    double margin = 0.0;  // 1 - d/p - 2/q
};

/// Subcriticality test d/p + 2/q < 1.
ProdiSerrin prodi_serrin_check(double p, double q, int dim);

/// Writes `components` values of a field at (t, x).
using Evaluator = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// A space-time field given by an evaluator. Cheap to copy; immutable.
class FieldFn {
public:
    FieldFn(int dim, std::size_t components, Evaluator eval);

    static FieldFn zero(int dim, std::size_t components);
    static FieldFn constant(int dim, std::vector<double> value);
    /// Scalar field |f|^2 of a vector field.
    static FieldFn squared_magnitude(const FieldFn& f);

    int dim() const { return dim_; }
    std::size_t components() const { return components_; }

    void operator()(double t, std::span<const double> x, std::span<double> out) const {
        (*eval_)(t, x, out);
    }
    /// Scalar convenience for one-component fields.
    double scalar(double t, std::span<const double> x) const;

    FieldFn scaled(double factor) const;

private:
    int dim_;
    std::size_t components_;
    std::shared_ptr<const Evaluator> eval_;
};

/// Explicit regularization of a singular drift. Unset members are inactive.
struct SingularityPolicy {
    std::optional<double> cap;            // |b| <= cap
    std::optional<double> mollification;  // |x| -> sqrt(|x|^2 + delta^2)
};

/// The drift b of dX = b(t, X) dt + dW.
///
/// The analytic core is wrapped with support truncation (b = 0 outside the
/// support radius) and, when configured, the magnitude cap. A drift that is
/// used in Hölder mode carries its Hölder exponent.
class DriftField {
public:
    DriftField(std::string name, int dim, Evaluator core, Exponents declared,
               SingularityPolicy policy = {}, std::optional<double> support_radius = std::nullopt,
               std::optional<double> holder_exponent = std::nullopt, bool identically_zero = false);

    static DriftField zero(int dim);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    const Exponents& exponents() const { return declared_; }
    const SingularityPolicy& policy() const { return policy_; }
    const std::optional<double>& support_radius() const { return support_radius_; }
    const std::optional<double>& holder_exponent() const { return holder_exponent_; }
    bool identically_zero() const { return zero_; }

    ProdiSerrin prodi_serrin() const;
    /// Throws invalid-argument unless the declared exponents are subcritical.
    void require_admissible() const;

    /// Evaluates b(t, x). Non-finite values are returned as-is when no cap is
    /// set; the caller decides whether that is a singularity error.
    void evaluate(double t, std::span<const double> x, std::span<double> out) const;

    FieldFn as_field() const;

private:
    std::string name_;
    int dim_;
    std::shared_ptr<const Evaluator> core_;
    Exponents declared_;
    SingularityPolicy policy_;
    std::optional<double> support_radius_;
    std::optional<double> holder_exponent_;
    bool zero_;
};

enum class Interpolation { multilinear, nearest };

/// Field sampled on the nodes of a SpaceTimeBox.
///
/// Layout is row-major [time][axis 0]...[axis d-1][component]. Evaluation is
/// multilinear (or nearest) in space with positions clamped to the box, and
/// piecewise constant from the left in time.
class GridField {
public:
    GridField() = default;
    GridField(const SpaceTimeBox& box, std::size_t components,
              Interpolation interp = Interpolation::multilinear);
    GridField(const SpaceTimeBox& box, std::size_t components, std::vector<double> values,
              Interpolation interp = Interpolation::multilinear);

    /// Samples f at every (time node, spatial node).
    static GridField sample(const FieldFn& f, const SpaceTimeBox& box);

    const SpaceTimeBox& box() const { return box_; }
    std::size_t components() const { return components_; }
    Interpolation interpolation() const { return interp_; }
    std::size_t slice_size() const { return box_.spatial_size() * components_; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::span<const double> slice(std::size_t ti) const;
    std::span<double> slice(std::size_t ti);

    double at(std::size_t ti, std::size_t node, std::size_t c) const {
        return values_[(ti * box_.spatial_size() + node) * components_ + c];
    }
    double& at(std::size_t ti, std::size_t node, std::size_t c) {
        return values_[(ti * box_.spatial_size() + node) * components_ + c];
    }

    void evaluate(double t, std::span<const double> x, std::span<double> out) const;
    /// Evaluation on a known time slice; skips the time lookup.
    void evaluate_slice(std::size_t ti, std::span<const double> x, std::span<double> out) const;

    /// Shares a copy of this field behind an evaluator.
    FieldFn as_field() const;

    /// Largest pointwise Euclidean norm over all components and nodes.
    double sup_norm() const;
    /// Largest |x| over stored values.
    double max_abs() const;

    GridField& operator+=(const GridField& other);
    GridField& operator*=(double factor);

    /// Flat binary layout, little-endian: u64 d, u64 nodes[d], u64 time_nodes,
    /// f64 t0 (= 0), f64 T, f64 (lower, upper) per axis, u64 components,
    /// then the values as f64 in storage order.
    void write(std::ostream& out) const;
    static GridField read(std::istream& in);
    void save(const std::string& path) const;
    static GridField load(const std::string& path);

private:
    SpaceTimeBox box_{};
    std::size_t components_ = 0;
    Interpolation interp_ = Interpolation::multilinear;
    std::vector<double> values_;
};

/// Value of ||f||_{L^q(0,T; L^p)} on a box, with the resolution it used.
struct MixedNorm {
    double value = 0.0;
    Exponents exponents{};
    std::size_t time_nodes = 0;
    std::size_t spatial_nodes = 0;
};

/// Midpoint rule in time, tensor trapezoid in space; |f| is the Euclidean
/// norm over components. The field is taken as zero outside the box.
MixedNorm lqp_norm(const FieldFn& f, Exponents e, const SpaceTimeBox& box);
/// Grid version: slice i represents [t_i, t_{i+1}).
MixedNorm lqp_norm(const GridField& f, Exponents e);
/// Raw version on (time slices x nodes) magnitudes, used by the solvers for
/// derived quantities. `magnitude(ti, node)` returns a pointwise norm.
MixedNorm lqp_norm(const std::function<double(std::size_t, std::size_t)>& magnitude,
                   Exponents e, const SpaceTimeBox& box);

/// Lower-bound estimate of sup_t ||f(t)||_{C_b^alpha}: supremum over grid
/// nodes plus Hölder quotients over axis-aligned node pairs (all strides)
/// and `probes` random pairs drawn with `seed`.
double holder_norm(const FieldFn& f, double alpha, const SpaceTimeBox& box,
                   std::size_t probes = 1024, std::uint64_t seed = 0x5eed);

}  // namespace roughdrift
