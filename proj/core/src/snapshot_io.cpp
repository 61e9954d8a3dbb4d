#include "sphr/snapshot_io.hpp"

#include "sphr/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts are not supported");

namespace sphr {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'H', 'R'};
constexpr std::uint32_t kFormatVersion = 1;

class Crc32 {
public:
    Crc32() {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int b = 0; b < 8; ++b) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table_[i] = c;
        }
    }

    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ = table_[(state_ ^ bytes[i]) & 0xFFu] ^ (state_ >> 8);
        }
    }

    std::uint32_t value() const { return state_ ^ 0xFFFFFFFFu; }

private:
    std::array<std::uint32_t, 256> table_{};
    std::uint32_t state_ = 0xFFFFFFFFu;
};

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}

    void bytes(const void* data, std::size_t size) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        crc_.update(data, size);
    }

    template <class T>
    void pod(const T& value) {
        bytes(&value, sizeof(T));
    }

    void finish() {
        const std::uint32_t crc = crc_.value();
        out_.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
    }

private:
    std::ofstream& out_;
    Crc32 crc_;
};

class Reader {
public:
    Reader(std::string data, std::string origin)
        : data_(std::move(data)), origin_(std::move(origin)) {}

    void bytes(void* out, std::size_t size) {
        if (pos_ + size > data_.size()) {
            throw IoError(origin_ + ": truncated snapshot");
        }
        std::memcpy(out, data_.data() + pos_, size);
        pos_ += size;
    }

    template <class T>
    T pod() {
        T value;
        bytes(&value, sizeof(T));
        return value;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

    void verify_checksum() {
        if (data_.size() < sizeof(std::uint32_t)) {
            throw IoError(origin_ + ": truncated snapshot");
        }
        Crc32 crc;
        crc.update(data_.data(), data_.size() - sizeof(std::uint32_t));
        std::uint32_t stored;
        std::memcpy(&stored, data_.data() + data_.size() - sizeof(std::uint32_t),
                    sizeof(std::uint32_t));
        if (crc.value() != stored) {
            throw IoError(origin_ + ": checksum mismatch, file is corrupted");
        }
    }

private:
    std::string data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

} // namespace

void write_snapshot(const std::filesystem::path& file, const Snapshot& snapshot) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write snapshot file '" + file.string() + "'");
    }
    const ParticleTable& t = snapshot.table;
    const std::size_t n = t.size();
    const std::vector<std::string> attrs = t.attribute_names();

    Writer w(out);
    w.bytes(kMagic, sizeof(kMagic));
    w.pod(kFormatVersion);
    w.pod(static_cast<std::uint64_t>(n));
    w.pod(snapshot.time);
    w.pod(snapshot.step);
    w.pod(static_cast<std::uint32_t>(attrs.size()));
    for (const std::string& name : attrs) {
        w.pod(static_cast<std::uint32_t>(name.size()));
        w.bytes(name.data(), name.size());
    }
    for (std::size_t i = 0; i < n; ++i) w.pod(static_cast<double>(i));
    w.bytes(t.masses().data(), n * sizeof(double));
    w.bytes(t.positions().data(), n * sizeof(Vec3));
    w.bytes(t.velocities().data(), n * sizeof(Vec3));
    w.bytes(t.densities().data(), n * sizeof(double));
    w.bytes(t.pressures().data(), n * sizeof(double));
    for (const std::string& name : attrs) {
        w.bytes(t.attribute(name).data(), n * sizeof(double));
    }
    w.finish();
    if (!out) {
        throw IoError("failed writing snapshot file '" + file.string() + "'");
    }
}

Snapshot read_snapshot(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IoError("cannot open snapshot file '" + file.string() + "'");
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(std::move(data), file.string());
    r.verify_checksum();

    char magic[4];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError(file.string() + ": not a snapshot file (bad magic)");
    }
    const auto version = r.pod<std::uint32_t>();
    if (version != kFormatVersion) {
        throw IoError(file.string() + ": unsupported snapshot version "
                      + std::to_string(version));
    }
    const auto n = static_cast<std::size_t>(r.pod<std::uint64_t>());
    if (n == 0) {
        throw IoError(file.string() + ": snapshot holds no particles");
    }
    // Ten f64 columns minimum; a header lying about n must not drive allocation.
    if (n > r.remaining() / (10 * sizeof(double))) {
        throw IoError(file.string() + ": particle count " + std::to_string(n)
                      + " exceeds the file size");
    }
    Snapshot snapshot;
    snapshot.time = r.pod<double>();
    snapshot.step = r.pod<std::uint64_t>();

    const auto attr_count = r.pod<std::uint32_t>();
    std::vector<std::string> attrs(attr_count);
    for (auto& name : attrs) {
        const auto len = r.pod<std::uint32_t>();
        name.resize(len);
        r.bytes(name.data(), len);
    }

    std::vector<double> ids(n);
    r.bytes(ids.data(), n * sizeof(double));
    std::vector<double> masses(n);
    r.bytes(masses.data(), n * sizeof(double));
    std::vector<Vec3> positions(n);
    r.bytes(positions.data(), n * sizeof(Vec3));
    std::vector<Vec3> velocities(n);
    r.bytes(velocities.data(), n * sizeof(Vec3));
    std::vector<double> densities(n);
    r.bytes(densities.data(), n * sizeof(double));
    std::vector<double> pressures(n);
    r.bytes(pressures.data(), n * sizeof(double));

    snapshot.table = ParticleTable::create(std::move(masses), std::move(positions),
                                           std::move(velocities));
    snapshot.table.set_densities(std::move(densities));
    snapshot.table.set_pressures(std::move(pressures));
    for (const std::string& name : attrs) {
        std::vector<double> values(n);
        r.bytes(values.data(), n * sizeof(double));
        snapshot.table.set_attribute(name, std::move(values));
    }
    if (r.remaining() != sizeof(std::uint32_t)) {
        throw IoError(file.string() + ": trailing bytes after snapshot payload");
    }
    return snapshot;
}

namespace {

void format_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

} // namespace

void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot) {
    const ParticleTable& t = snapshot.table;
    const std::vector<std::string> attrs = t.attribute_names();
    out << "id,mass,x,y,z,vx,vy,vz,rho,P";
    for (const std::string& name : attrs) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << i;
        out << ',';
        format_double(out, t.masses()[i]);
        for (int a = 0; a < 3; ++a) {
            out << ',';
            format_double(out, t.positions()[i][a]);
        }
        for (int a = 0; a < 3; ++a) {
            out << ',';
            format_double(out, t.velocities()[i][a]);
        }
        out << ',';
        format_double(out, t.densities()[i]);
        out << ',';
        format_double(out, t.pressures()[i]);
        for (const std::string& name : attrs) {
            out << ',';
            format_double(out, t.attribute(name)[i]);
        }
        out << '\n';
    }
}

void write_snapshot_csv(const std::filesystem::path& file, const Snapshot& snapshot) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write CSV file '" + file.string() + "'");
    }
    write_snapshot_csv(out, snapshot);
    if (!out) {
        throw IoError("failed writing CSV file '" + file.string() + "'");
    }
}

} // namespace sphr
