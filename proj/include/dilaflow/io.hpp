#pragma once

// Surface files, JSON reports and trace dumps.

#include <string>
#include <string_view>

#include <json.hpp>

#include "dilaflow/horizon.hpp"
#include "dilaflow/sweep.hpp"

namespace dilaflow {

using Json = nlohmann::ordered_json;

/// Whole file, or standard input for "-". Throws Malformed if unreadable.
std::string read_text(const std::string& path);

/// Parses the surface file format. Structural problems throw Malformed;
/// geometric ones are left to Surface::validate.
SurfaceSpec parse_surface(std::string_view text);
Surface load_surface(const std::string& path, ValidateOptions options = {});

/// Canonical text: fixed key order, one polygon or pairing per line and
/// shortest round-trip numbers. Parsing and writing it again is the identity.
std::string write_surface(const SurfaceSpec& spec);

std::string surface_id(const Surface& s);
std::string geodesic_id(const ClosedGeodesic& g);
std::string connection_id(const SaddleConnection& sc);

Json info_json(const Surface& s);
Json to_json(const CrossingRecord& r);
Json to_json(const TraceOutcome& o);
Json to_json(const ClosedGeodesic& g);
Json to_json(const SaddleConnection& sc);
Json to_json(const Cylinder& c);
Json to_json(const CrossingBoundEstimate& e);
Json to_json(const Pencil& p);
Json to_json(const DirectionClass& c);
Json to_json(const SweepReport& r);

/// One JSON object per crossing, then a final line holding the outcome.
std::string trace_lines(const TraceResult& t);

/// Compact rendering followed by a newline.
std::string dump_line(const Json& j);

}  // namespace dilaflow
