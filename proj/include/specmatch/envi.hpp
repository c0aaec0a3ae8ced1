#pragma once

#include <string>

#include "specmatch/types.hpp"

namespace specmatch {

enum class Interleave { BSQ, BIL, BIP };

struct EnviHeader {
    int samples = 0;  // width
    int lines = 0;    // height
    int bands = 0;
    Interleave interleave = Interleave::BSQ;
    int data_type = 5;   // ENVI codes: 4 = float32, 5 = float64, 12 = uint16
    int byte_order = 0;  // 0 = little endian, 1 = big endian
    long header_offset = 0;

    void validate() const;
    int element_size() const;
};

EnviHeader parse_envi_header(const std::string& path);

// Pixels land in row-major spatial order whatever the interleave; the three
// layouts of the same values load to identical cubes.
SpectralCube load_envi(const std::string& header_path, const std::string& data_path);

// Writes float data (types 4 or 5) in either byte order.
void write_envi(const SpectralCube& cube, const std::string& header_path,
                const std::string& data_path, Interleave interleave = Interleave::BSQ,
                int data_type = 5, int byte_order = 0);

}  // namespace specmatch
