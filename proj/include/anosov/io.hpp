#pragma once
// JSON and CSV serialization for everything the command-line tools read or
// write: diffeomorphisms, families, integer sequences, splitting fields,
// displacement fields, certificates, and solver configs. Doubles survive a
// round trip exactly (shortest-round-trip decimal text); JSON has no
// literals for non-finite values, so those are encoded as the strings
// "inf", "-inf", "nan". Config objects are parsed strictly: unknown keys
// are rejected by name so typos cannot silently fall back to defaults.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anosov/certificate.hpp"
#include "anosov/conjugacy.hpp"
#include "anosov/diffeo.hpp"
#include "anosov/family.hpp"
#include "anosov/multiplicative.hpp"
#include "anosov/sections.hpp"
#include "anosov/splitting.hpp"

namespace anosov {

using Json = nlohmann::json;

// Non-finite-safe scalar encoding; real_from_json accepts numbers and the
// three string spellings above.
Json json_real(double v);
double real_from_json(const Json& j);

// [[a, b], [c, d]] with integer entries.
Json to_json(const IntMat2& m);
IntMat2 intmat2_from_json(const Json& j);

// {"linear": [[a,b],[c,d]], "modes": [{"k": [k1,k2], "cos": [x,y],
//  "sin": [x,y]}, ...]}; construction re-validates the diffeomorphism
// invariants on load.
Json to_json(const TorusDiffeo& f);
TorusDiffeo diffeo_from_json(const Json& j);

// Single-step maps serialize as the plain diffeomorphism object; gathered
// chains as {"steps": [diffeo, ...]} applied first-to-last.
Json to_json(const TorusMap& f);
TorusMap torus_map_from_json(const Json& j);

// Mirrors the presentation enum:
//   {"presentation": "constant", "map": {...}}
//   {"presentation": "periodic", "maps": [...]}
//   {"presentation": "word", "core_start": a, "core": [...],
//    "left_tail": [...], "right_tail": [...]}
Json to_json(const FamilySpec& F);
FamilySpec family_from_json(const Json& j);

// {"presentation": "periodic", "entries": [...]} or
// {"presentation": "word", "core_start": a, "entries": [...],
//  "left_value": v, "right_value": w}
Json to_json(const IntSeqSpec& seq);
IntSeqSpec int_seq_from_json(const Json& j);

// [lo, hi]
Json to_json(const Window& w);
Window window_from_json(const Json& j);

// {"window": [lo,hi], "grid_n": n, "stable": [[[x,y] per node] per index],
//  "unstable": [...]}; node order is row-major with jx fastest. Stored
// directions are unit with canonical sign, so a round trip reproduces the
// field up to one renormalization rounding.
Json to_json(const SplittingField& S);
SplittingField splitting_from_json(const Json& j);

// {"window": [lo,hi], "grid_n": n, "period": P, "radius": tau | null,
//  "sections": [[[u,v] per node] per index]}; exact round trip.
Json to_json(const DisplacementFamily& H);
DisplacementFamily displacement_from_json(const Json& j);

// Certificates carry "schema_version": 1 and a string status.
Json to_json(const Certificate& cert);
Certificate certificate_from_json(const Json& j);

// All keys optional (absent keys keep the struct defaults); the usual
// validation runs where the config is consumed. Keys: lambda, eta, zeta,
// r_prime, xi_prime, r_tilde, xi, grid_n, window, max_iter, tol.
Json to_json(const ConjugacyConfig& cfg);
ConjugacyConfig conjugacy_config_from_json(const Json& j);

// Numeric table with a header row; cells print as shortest-round-trip
// decimals via %.17g.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
std::string csv_to_string(const CsvTable& table);
CsvTable csv_from_string(const std::string& text);

std::string format_real(double v);  // %.17g

// Throw std::runtime_error with the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json load_json(const std::string& path);
// dump(2) plus a trailing newline.
void save_json(const std::string& path, const Json& j);

// 64-bit FNV-1a over raw bytes; the hex form is 16 lowercase digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace anosov
