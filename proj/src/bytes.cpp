#include "gcf/bytes.hpp"

#include <fstream>
#include <sstream>

namespace gcf::bytes {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GcfError("io", "cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw GcfError("io", "read failed: " + path);
    return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw GcfError("io", "cannot open for writing: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out.good()) throw GcfError("io", "write failed: " + path);
}

std::uint64_t fnv1a64(const std::string& data, std::uint64_t h) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& data) { return fnv1a64(data, kFnvOffsetBasis); }

}  // namespace gcf::bytes
