#pragma once

// Text fixture format for tensors:
//
//   M N
//   I_1 ... I_M        (empty line when M = 0)
//   J_1 ... J_N        (empty line when N = 0)
//   re im              (one line per entry, bijection order)
//
// Values are written with 17 significant digits so a write/read cycle is
// bit-exact.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hwt/tensor.hpp"

namespace hwt {

void write_fixture(std::ostream& os, const DenseTensor& t);
DenseTensor read_fixture(std::istream& is);

void save_fixture(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor load_fixture(const std::filesystem::path& path);

std::string to_fixture_string(const DenseTensor& t);
DenseTensor from_fixture_string(const std::string& text);

}  // namespace hwt
