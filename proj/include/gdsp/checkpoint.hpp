#pragma once

#include <map>
#include <string>

#include "gdsp/types.hpp"

namespace gdsp {

// One named tensor in a GDSP checkpoint: rank + dims + row-major float64 values.
struct Record {
    std::vector<std::uint32_t> dims;
    std::vector<double> values;
};

using RecordMap = std::map<std::string, Record>;

// File layout: magic "GDSP", u32 format version, then records of
// (u32 name length, UTF-8 name, u32 rank, u32 dims..., float64 LE values).
void write_records(const RecordMap& records, const std::string& path);
RecordMap read_records(const std::string& path);

constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace gdsp
