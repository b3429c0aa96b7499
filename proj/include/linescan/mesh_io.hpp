#pragma once

#include "linescan/geometry.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace linescan {

/// Parse failure with the offending file and line number in the message.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

/// Loads an ASCII OBJ or ASCII PLY mesh. Polygon faces are fan-triangulated,
/// degenerate (zero-area) triangles are dropped. The format is picked by file
/// extension, with a content sniff as fallback.
TriangleMesh loadMesh(const std::string& path);

TriangleMesh loadMeshObj(const std::string& path);
TriangleMesh loadMeshPly(const std::string& path);

/// Reads vertex positions (and normals when present) from an ASCII PLY.
PointCloud loadPointCloudPly(const std::string& path);

using Rgb = std::array<std::uint8_t, 3>;

/// Writes an ASCII PLY. Normals are written when the cloud has them; colors
/// are written when `colors` is non-empty (must match the point count).
void writePointCloudPly(const std::string& path, const PointCloud& cloud,
                        const std::vector<Rgb>& colors = {});

}  // namespace linescan
