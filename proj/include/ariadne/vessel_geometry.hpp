// include/ariadne/vessel_geometry.hpp
// Centerline graph decomposition, arc-length radius profiles and geometric
// stenosis candidates.
#pragma once

#include <iosfwd>
#include <vector>

#include "ariadne/raster.hpp"
#include "ariadne/topology.hpp"

namespace ariadne {

// Ordered, 8-adjacent skeleton pixels with cumulative arc length (steps of 1
// or sqrt 2). arc[0] == 0 and arc is strictly increasing.
struct CenterlinePath {
    std::vector<Pixel> points;
    std::vector<double> arc;

    std::size_t size() const noexcept { return points.size(); }
    double length() const noexcept { return arc.empty() ? 0.0 : arc.back(); }

    static CenterlinePath from_points(std::vector<Pixel> points);
};

// Splits a unit-width skeleton into maximal junction-free branches. Adjacency
// is m-adjacency (a diagonal neighbor only counts when no shared 4-neighbor is
// set), so staircase corners do not read as junctions. Pixels with three or
// more neighbors are junctions and are appended to every incident branch.
// Two adjacent junction pixels form a two-point path of their own. Closed
// loops become one path cut open at their first pixel in raster order.
// Isolated single pixels cannot form a path and are dropped.
std::vector<CenterlinePath> extract_paths(const BinaryMask& skeleton);

// Removes terminal branches of at most `max_length` pixels that end in a
// junction, repeating until none are left. Thinning leaves such spurs where
// the vessel wall has staircase corners; each one would otherwise split a
// branch in two. Components without junctions are never shortened.
BinaryMask prune_spurs(const BinaryMask& skeleton, int max_length);

inline constexpr double kSigmaFloor = 1e-6;

struct RadiusProfile {
    CenterlinePath path;
    std::vector<double> r;     // px, after smoothing
    std::vector<double> grad;  // dr/ds
    std::vector<double> curv;  // d2r/ds2
    std::vector<double> z;     // (r - mean) / stddev
    double mean = 0.0;
    double stddev = kSigmaFloor;  // clamped to kSigmaFloor

    std::size_t size() const noexcept { return r.size(); }
};

// Samples the distance field along the path, smooths with a centered moving
// average of odd width `smooth_window` (truncated at the ends) and takes
// second-order finite differences in arc length, one-sided at the endpoints.
// Throws DataError for paths shorter than three points.
RadiusProfile build_profile(const CenterlinePath& path, const DistanceField& field, int smooth_window = 5);

// Same, from raw radius samples already aligned with `path`.
RadiusProfile build_profile(const CenterlinePath& path, std::vector<double> raw_radius, int smooth_window = 5);

struct CandidateParams {
    double k = 1.5;
    double theta_curv = 0.0;
    int suppression_radius = 10;  // samples
};

struct Candidate {
    int path_id = 0;
    int index = 0;
    Pixel pixel;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidateSet {
    std::vector<Candidate> candidates;
    CandidateParams params;
};

// Indices with r < mean - k*stddev and curvature > theta_curv; within any
// `suppression_radius` samples only the smallest radius survives (ties to the
// lower index). Returned in index order.
CandidateSet generate_candidates(const RadiusProfile& profile, const CandidateParams& params = {}, int path_id = 0);

struct VesselAnalysisParams {
    int smooth_window = 5;
    int spur_length = 5;       // pruned before path extraction; 0 keeps all
    int min_path_points = 10;  // shorter branches are not profiled
    CandidateParams candidates;
};

// mask -> skeleton -> spur pruning -> distance field -> per-branch profiles -> candidates.
// `profiles[i]` carries path id i; candidates are ordered by (path id, index).
struct VesselAnalysis {
    BinaryMask skeleton;
    DistanceField field;
    std::vector<RadiusProfile> profiles;
    std::vector<Candidate> candidates;
};

VesselAnalysis analyze_vessels(const BinaryMask& mask, const VesselAnalysisParams& params = {});

// CSV with header `s,x,y,r,grad,curv,z`.
void write_profile_csv(const RadiusProfile& profile, std::ostream& out);

}  // namespace ariadne
