#pragma once

// JSON instance files. Doubles are written with round-trip precision.

#include <filesystem>
#include <string>

#include "mipreg/rat/instance.hpp"

namespace mipreg::rat {

std::string to_json(const RatInstance& inst);

/// Parses and validates. Syntax and field errors raise FormatError naming
/// the line or the field; caps that exclude every assignment raise
/// InfeasibleInputError.
RatInstance from_json(const std::string& text);

void save_instance(const RatInstance& inst, const std::filesystem::path& path);
RatInstance load_instance(const std::filesystem::path& path);

}  // namespace mipreg::rat
