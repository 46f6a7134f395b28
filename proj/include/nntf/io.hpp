#pragma once

#include "nntf/tensor.hpp"

#include <stdexcept>
#include <string>

namespace nntf {

// File/parse failures; the message carries "path:line:" where applicable.
// Maps to CLI exit code 1.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Shortest decimal string that round-trips the exact double (to_chars).
std::string format_double(double value);

// Text tensor format:
//   line 1: "TNSR 1"
//   line 2: N followed by the N mode sizes
//   then:   whitespace-separated values, row-major (last index fastest),
//           one last-mode fiber per line as written by write_tensor_file.
// Parsing accepts any whitespace layout. Inputs above 10^7 entries are
// rejected up front.
DenseTensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const DenseTensor& t);

// Plain numeric CSV, one matrix row per line, '.' decimal separator, '\n'
// line endings, no header.
void write_matrix_csv(const std::string& path, const Matrix& m);

void write_text_file(const std::string& path, const std::string& content);

} // namespace nntf
