// Copyright 2026 The fairfeas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fairfeas {

// Summed-volume table over a dense 3-D occupancy grid. Box queries are O(1)
// and clip to the grid.
class PrefixSum3D {
 public:
  PrefixSum3D() = default;

  // Dimensions are the extents of the three axes; points are added before
  // build() and are ignored afterwards.
  PrefixSum3D(int nx, int ny, int nz)
      : nx_(nx), ny_(ny), nz_(nz),
        table_(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1), 0) {}

  void add(int x, int y, int z, std::uint32_t count = 1) {
    table_[index(x + 1, y + 1, z + 1)] += count;
  }

  void build() {
    for (int x = 1; x <= nx_; ++x) {
      for (int y = 1; y <= ny_; ++y) {
        for (int z = 1; z <= nz_; ++z) {
          table_[index(x, y, z)] +=
              table_[index(x - 1, y, z)] + table_[index(x, y - 1, z)] +
              table_[index(x, y, z - 1)] - table_[index(x - 1, y - 1, z)] -
              table_[index(x - 1, y, z - 1)] - table_[index(x, y - 1, z - 1)] +
              table_[index(x - 1, y - 1, z - 1)];
        }
      }
    }
  }

  // Number of points with lo <= coordinate <= hi on every axis.
  std::uint64_t box(int x0, int x1, int y0, int y1, int z0, int z1) const {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    z0 = std::max(z0, 0);
    x1 = std::min(x1, nx_ - 1);
    y1 = std::min(y1, ny_ - 1);
    z1 = std::min(z1, nz_ - 1);
    if (x0 > x1 || y0 > y1 || z0 > z1) return 0;
    // Unsigned wraparound cancels out in the inclusion-exclusion sum.
    const std::uint64_t s = at(x1 + 1, y1 + 1, z1 + 1) - at(x0, y1 + 1, z1 + 1) -
                            at(x1 + 1, y0, z1 + 1) - at(x1 + 1, y1 + 1, z0) +
                            at(x0, y0, z1 + 1) + at(x0, y1 + 1, z0) +
                            at(x1 + 1, y0, z0) - at(x0, y0, z0);
    return s;
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

 private:
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(x) * (ny_ + 1) + y) * (nz_ + 1) + z;
  }
  std::uint64_t at(int x, int y, int z) const { return table_[index(x, y, z)]; }

  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<std::uint64_t> table_;
};

}  // namespace fairfeas
