#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soh/core.hpp"
#include "soh/twofluid.hpp"

namespace soh {

enum class SnapshotKind : std::uint32_t { single = 1, two_fluid = 2 };

/// Self-describing dump of one state. Field order is fixed per kind:
/// single: rho q1 q2; two_fluid: rho_p rho_m qp1 qp2 qm1 qm2 wp1 wp2 wm1 wm2.
struct Snapshot {
    SnapshotKind kind = SnapshotKind::single;
    Grid grid;
    double time = 0.0;
    std::uint64_t params_digest = 0;
    std::vector<std::vector<double>> fields;

    static const std::vector<std::string>& field_names(SnapshotKind kind);
    const std::vector<std::string>& names() const { return field_names(kind); }
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// FNV-1a over the bit patterns of every ModelParams field.
std::uint64_t params_digest(const ModelParams& params);

Snapshot make_snapshot(const FieldState& state, const ModelParams& params);
Snapshot make_snapshot(const TwoFluidState& state, const ModelParams& params);
FieldState to_field_state(const Snapshot& snap);
TwoFluidState to_two_fluid(const Snapshot& snap);

/// Little-endian binary: magic "SOHSNAP\0", u32 version, u32 kind, i32 nx, i32 ny, f64 dx, f64 dy,
/// u32 bx, u32 by, f64 time, u64 params digest, u32 field count, then the fields as f64 arrays.
std::string encode_snapshot(const Snapshot& snap);
Snapshot decode_snapshot(const std::string& bytes);
void write_snapshot(const Snapshot& snap, const std::string& path);
Snapshot read_snapshot(const std::string& path);

/// Text mirror: '#' header lines (format, kind, grid, time, digest, column list) then one row per
/// cell "i j x y <fields>" in row-major order, values printed with %.17g.
std::string encode_text_mirror(const Snapshot& snap);
Snapshot decode_text_mirror(const std::string& text);
void write_text_mirror(const Snapshot& snap, const std::string& path);
Snapshot read_text_mirror(const std::string& path);

}  // namespace soh
