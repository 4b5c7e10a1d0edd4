#pragma once

#include "roughdrift/field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace roughdrift {

/// Parameters of a named drift preset. Which members matter depends on the
/// preset:
///   truncated_radial  A x / |x|_delta^(beta+1) for |x| <= radius
///   indicator_box     A e_1 on the cube |x|_inf <= radius
///   gaussian_bump     A e_1 exp(-|x|^2 / 2 width^2), truncated at radius
///   holder_kink       A e_1 (1 - (|x| / radius)^alpha)_+
///   zero              b = 0
struct PresetParams {
    std::string preset = "zero";
    int dim = 1;
    double amplitude = 1.0;
    double beta = 0.3;
    double radius = 1.0;
    std::optional<double> cap;
    std::optional<double> mollification;
    double width = 0.25;
    double alpha = 0.5;
    Exponents exponents{7.0, 15.0};
};

const std::vector<std::string>& preset_names();

/// Builds the drift of a preset. Throws config errors for unknown presets
/// and for a singular preset without an explicit cap or mollification.
DriftField make_drift(const PresetParams& params);

/// Radius outside which the preset vanishes.
double support_radius(const PresetParams& params);

/// Box containing the support inflated by 6 sqrt(T), so the heat-kernel
/// tail mass outside is below 1e-8.
SpaceTimeBox box_for(const PresetParams& params, double horizon, std::size_t nodes_per_axis,
                     std::size_t time_nodes);

struct CorpusEntry {
    std::string name;
    PresetParams params;
    ProdiSerrin prodi_serrin;
    bool holder_mode = false;
    /// For truncated_radial: beta * p < d, i.e. |x|^-beta is locally in L^p.
    /// Always true for bounded presets.
    bool declared_membership_consistent = true;
};

/// Default registry.
std::vector<CorpusEntry> corpus_list();
CorpusEntry corpus_entry(const PresetParams& params, const std::string& name);

}  // namespace roughdrift
