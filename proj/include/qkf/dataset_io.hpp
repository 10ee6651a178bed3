#pragma once

// CSV contracts for load paths and labeled datasets.
//
//   paths:   path_id,increment,eps11,eps22,gam12,sig11,sig22,sig12
//   raw:     path_id,increment,time,U1,U2,U3,U4,F1,F2,F3,F4
//   dataset: path columns followed by `label`
//
// Numbers are written in shortest round-trip form.

#include "qkf/data_pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qkf {

inline constexpr const char* kPathsHeader =
    "path_id,increment,eps11,eps22,gam12,sig11,sig22,sig12";
inline constexpr const char* kRawHeader =
    "path_id,increment,time,U1,U2,U3,U4,F1,F2,F3,F4";
inline constexpr const char* kDatasetHeader =
    "path_id,increment,eps11,eps22,gam12,sig11,sig22,sig12,label";

std::string format_double(double v);

std::vector<LoadPath> read_paths_csv(std::istream& in);
std::vector<LoadPath> read_paths_csv(const std::filesystem::path& file);
void write_paths_csv(std::ostream& out, const std::vector<LoadPath>& paths);

std::vector<LoadPath> read_raw_csv(std::istream& in, const PlateGeometry& geom,
                                   double eps_div = kDefaultEpsDiv);
std::vector<LoadPath> read_raw_csv(const std::filesystem::path& file,
                                   const PlateGeometry& geom,
                                   double eps_div = kDefaultEpsDiv);

// Stress columns are not part of a Dataset and are written empty.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
void write_dataset_csv(const std::filesystem::path& file, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& file);

void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace qkf
