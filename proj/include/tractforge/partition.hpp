#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "tractforge/geom.hpp"

namespace tractforge {

// One interval of a boundary partition. Endpoints are embedded points on the
// carrier; `length` is arc length along the carrier, `diam` the Euclidean
// diameter when the interval is embedded, `tau_length` the image length under
// the tract's uniformizing map when known.
struct PartitionInterval {
    Point a{0.0, 0.0};
    Point b{0.0, 0.0};
    double length = 0.0;
    std::optional<double> diam;
    std::optional<double> tau_length;
};

// Ordered, locally finite partition of a boundary curve into disjoint open
// intervals whose closures cover the carrier window.
struct BoundaryPartition {
    enum class Carrier { line, circle, tract_boundary };
    Carrier carrier = Carrier::line;
    std::vector<PartitionInterval> intervals;

    std::size_t size() const { return intervals.size(); }
};

// Partition of the imaginary axis given by sorted real cut heights: the k-th
// interval runs from i*cuts[k] to i*cuts[k+1].
inline BoundaryPartition line_partition_imaginary(const std::vector<double>& cuts) {
    if (cuts.size() < 2) throw std::invalid_argument("line_partition_imaginary: need >= 2 cuts");
    BoundaryPartition p;
    p.carrier = BoundaryPartition::Carrier::line;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (!(cuts[k] < cuts[k + 1]))
            throw std::invalid_argument("line_partition_imaginary: cuts must be strictly increasing");
        PartitionInterval iv;
        iv.a = Point{0.0, cuts[k]};
        iv.b = Point{0.0, cuts[k + 1]};
        iv.length = cuts[k + 1] - cuts[k];
        iv.diam = iv.length;
        p.intervals.push_back(iv);
    }
    return p;
}

}  // namespace tractforge
