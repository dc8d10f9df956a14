#include "shelby/codec.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "shelby/errors.hpp"
#include "shelby/gf256.hpp"

namespace shelby {

namespace {

using Mat = std::vector<std::vector<std::uint8_t>>;

// Coupling coefficient for the pairwise transform; any value outside {0, 1}
// keeps the 2x2 coupling matrix [[1, g], [g, 1]] invertible over GF(2^8).
constexpr std::uint8_t kGamma = 2;

Mat mat_identity(std::uint32_t n) {
    Mat m(n, std::vector<std::uint8_t>(n, 0));
    for (std::uint32_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

Mat mat_mul(const Mat& a, const Mat& b) {
    const std::size_t rows = a.size(), inner = b.size(), cols = b[0].size();
    Mat out(rows, std::vector<std::uint8_t>(cols, 0));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < inner; ++j) {
            const std::uint8_t c = a[i][j];
            if (c == 0) continue;
            for (std::size_t l = 0; l < cols; ++l) {
                out[i][l] ^= gf::mul(c, b[j][l]);
            }
        }
    }
    return out;
}

// Gauss-Jordan inverse; throws if singular (never expected for the matrices
// derived from distinct-point Vandermonde systems).
Mat mat_invert(Mat a) {
    const std::size_t n = a.size();
    Mat inv = mat_identity(static_cast<std::uint32_t>(n));
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a[pivot][col] == 0) ++pivot;
        if (pivot == n) throw_error(Errc::internal, "codec: singular matrix");
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const std::uint8_t piv_inv = gf::inv(a[col][col]);
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] = gf::mul(a[col][j], piv_inv);
            inv[col][j] = gf::mul(inv[col][j], piv_inv);
        }
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col] == 0) continue;
            const std::uint8_t f = a[row][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[row][j] ^= gf::mul(f, a[col][j]);
                inv[row][j] ^= gf::mul(f, inv[col][j]);
            }
        }
    }
    return inv;
}

// Systematic n x k generator from a Vandermonde matrix on distinct points
// 0..n-1: top k rows become the identity, and every k-row subset stays
// invertible, which is the MDS property.
Mat systematic_generator(std::uint32_t n, std::uint32_t k) {
    Mat v(n, std::vector<std::uint8_t>(k, 0));
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < k; ++j) {
            v[i][j] = gf::pow(static_cast<std::uint8_t>(i), j);
        }
    }
    Mat top(v.begin(), v.begin() + k);
    return mat_mul(v, mat_invert(std::move(top)));
}

void row_xor_scaled(std::uint8_t* out, const std::uint8_t* in, std::size_t len,
                    std::uint8_t coef) {
    gf::mul_acc(out, in, len, coef);
}

void row_scale(std::uint8_t* row, std::size_t len, std::uint8_t coef) {
    for (std::size_t i = 0; i < len; ++i) row[i] = gf::mul(row[i], coef);
}

} // namespace

std::uint32_t CodingParams::alpha() const {
    if (scheme == Scheme::ReedSolomon) return 1;
    std::uint64_t a = 1;
    for (std::uint32_t i = 0; i < t(); ++i) a *= q();
    return static_cast<std::uint32_t>(a);
}

void CodingParams::validate() const {
    if (k < 1 || m < 1) throw_error(Errc::param, "coding params: need k >= 1 and m >= 1");
    if (n() > 255) throw_error(Errc::param, "coding params: n must not exceed 255");
    if (chunk_size == 0) throw_error(Errc::param, "coding params: chunk_size must be positive");
    if (scheme == Scheme::ReedSolomon) return;
    if (d < k || d > n() - 1) {
        throw_error(Errc::param, "coding params: require k <= d <= n-1");
    }
    if (n() % q() != 0) {
        throw_error(Errc::param, "coding params: coupled-layer scheme needs n = q*t with q = d-k+1");
    }
    if (chunk_size % alpha() != 0) {
        throw_error(Errc::param, "coding params: chunk_size must be divisible by alpha = q^t");
    }
}

CodingParams CodingParams::reed_solomon(std::uint32_t k, std::uint32_t m,
                                        std::uint64_t chunk_size) {
    CodingParams p;
    p.k = k;
    p.m = m;
    p.d = k;
    p.scheme = Scheme::ReedSolomon;
    p.chunk_size = chunk_size;
    p.validate();
    return p;
}

CodingParams CodingParams::clay(std::uint32_t k, std::uint32_t m, std::uint32_t d,
                                std::uint64_t chunk_size) {
    CodingParams p;
    p.k = k;
    p.m = m;
    p.d = d;
    p.scheme = Scheme::Clay;
    p.chunk_size = chunk_size;
    p.validate();
    return p;
}

struct Codec::Impl {
    CodingParams params;
    std::uint32_t n = 0;
    std::uint32_t alpha = 0;
    std::uint64_t row_bytes = 0;
    Mat generator;          // n x k systematic generator
    Mat parity_check;       // m x n, H = [P | I]
    std::vector<std::uint64_t> pow_q;
    std::uint8_t inv_one_plus_g2 = 0;

    explicit Impl(const CodingParams& p) : params(p) {
        params.validate();
        n = params.n();
        alpha = params.alpha();
        row_bytes = params.chunk_size / alpha;
        generator = systematic_generator(n, params.k);
        parity_check.assign(params.m, std::vector<std::uint8_t>(n, 0));
        for (std::uint32_t r = 0; r < params.m; ++r) {
            for (std::uint32_t j = 0; j < params.k; ++j) {
                parity_check[r][j] = generator[params.k + r][j];
            }
            parity_check[r][params.k + r] = 1;
        }
        if (params.scheme == Scheme::Clay) {
            pow_q.resize(params.t() + 1);
            pow_q[0] = 1;
            for (std::uint32_t i = 1; i <= params.t(); ++i) pow_q[i] = pow_q[i - 1] * params.q();
            inv_one_plus_g2 = gf::inv(1 ^ gf::mul(kGamma, kGamma));
        }
    }

    [[nodiscard]] std::uint32_t digit(std::uint64_t z, std::uint32_t y) const {
        return static_cast<std::uint32_t>((z / pow_q[y]) % params.q());
    }

    [[nodiscard]] std::uint64_t set_digit(std::uint64_t z, std::uint32_t y,
                                          std::uint32_t c) const {
        return z + (std::int64_t(c) - std::int64_t(digit(z, y))) * std::int64_t(pow_q[y]);
    }

    [[nodiscard]] std::uint32_t node_x(std::uint32_t j) const { return j % params.q(); }
    [[nodiscard]] std::uint32_t node_y(std::uint32_t j) const { return j / params.q(); }
    [[nodiscard]] std::uint32_t node_index(std::uint32_t x, std::uint32_t y) const {
        return y * params.q() + x;
    }

    // Fills in the erased chunks of a coupled-layer codeword. `chunks` holds n
    // payload slots; slots listed in `erased` may be empty and are produced.
    // Planes are processed by increasing intersection score so that every
    // uncoupling step only consumes values from already-completed planes.
    void clay_recover(std::vector<Bytes>& chunks, const std::vector<std::uint32_t>& erased) const {
        std::vector<bool> is_erased(n, false);
        for (auto e : erased) is_erased[e] = true;

        std::vector<std::uint32_t> known;
        for (std::uint32_t j = 0; j < n; ++j) {
            if (!is_erased[j]) known.push_back(j);
        }
        const std::vector<std::uint32_t> sel(known.begin(), known.begin() + params.k);

        // D maps the k selected known plane symbols to the erased ones.
        Mat e_sel(params.k, std::vector<std::uint8_t>(params.k));
        for (std::uint32_t r = 0; r < params.k; ++r) e_sel[r] = generator[sel[r]];
        const Mat inv_sel = mat_invert(std::move(e_sel));
        Mat e_erased(erased.size(), std::vector<std::uint8_t>(params.k));
        for (std::size_t r = 0; r < erased.size(); ++r) e_erased[r] = generator[erased[r]];
        const Mat solve = mat_mul(e_erased, inv_sel);

        std::vector<std::vector<std::uint64_t>> planes_by_score(params.t() + 1);
        for (std::uint64_t z = 0; z < alpha; ++z) {
            std::uint32_t score = 0;
            for (auto e : erased) {
                if (digit(z, node_y(e)) == node_x(e)) ++score;
            }
            planes_by_score[score].push_back(z);
        }

        std::vector<Bytes> u(n, Bytes(params.chunk_size, 0));

        for (const auto& plane_set : planes_by_score) {
            for (std::uint64_t z : plane_set) {
                for (std::uint32_t j = 0; j < n; ++j) {
                    if (is_erased[j]) continue;
                    const std::uint32_t x = node_x(j), y = node_y(j);
                    const std::uint32_t zy = digit(z, y);
                    std::uint8_t* urow = u[j].data() + z * row_bytes;
                    const std::uint8_t* crow = chunks[j].data() + z * row_bytes;
                    if (x == zy) {
                        std::memcpy(urow, crow, row_bytes);
                        continue;
                    }
                    const std::uint32_t jc = node_index(zy, y);
                    const std::uint64_t zc = set_digit(z, y, x);
                    if (!is_erased[jc]) {
                        std::memcpy(urow, crow, row_bytes);
                        row_xor_scaled(urow, chunks[jc].data() + zc * row_bytes, row_bytes, kGamma);
                        row_scale(urow, row_bytes, inv_one_plus_g2);
                    } else {
                        // Companion chunk is lost: uncouple against its U value,
                        // which lives in a plane with a lower intersection score.
                        std::memcpy(urow, crow, row_bytes);
                        row_xor_scaled(urow, u[jc].data() + zc * row_bytes, row_bytes, kGamma);
                    }
                }
                // Plane-level MDS solve for the erased nodes' U rows.
                for (std::size_t r = 0; r < erased.size(); ++r) {
                    std::uint8_t* urow = u[erased[r]].data() + z * row_bytes;
                    std::memset(urow, 0, row_bytes);
                    for (std::uint32_t s = 0; s < params.k; ++s) {
                        row_xor_scaled(urow, u[sel[s]].data() + z * row_bytes, row_bytes,
                                       solve[r][s]);
                    }
                }
            }
        }

        // Re-couple to produce the lost chunks.
        for (auto j : erased) {
            chunks[j].assign(params.chunk_size, 0);
            const std::uint32_t x = node_x(j), y = node_y(j);
            for (std::uint64_t z = 0; z < alpha; ++z) {
                const std::uint32_t zy = digit(z, y);
                std::uint8_t* crow = chunks[j].data() + z * row_bytes;
                std::memcpy(crow, u[j].data() + z * row_bytes, row_bytes);
                if (x != zy) {
                    const std::uint32_t jc = node_index(zy, y);
                    const std::uint64_t zc = set_digit(z, y, x);
                    row_xor_scaled(crow, u[jc].data() + zc * row_bytes, row_bytes, kGamma);
                }
            }
        }
    }

    void rs_fill(std::vector<Bytes>& chunks, const std::vector<std::uint32_t>& erased) const {
        std::vector<bool> is_erased(n, false);
        for (auto e : erased) is_erased[e] = true;
        std::vector<std::uint32_t> known;
        for (std::uint32_t j = 0; j < n; ++j) {
            if (!is_erased[j]) known.push_back(j);
        }
        const std::vector<std::uint32_t> sel(known.begin(), known.begin() + params.k);
        Mat e_sel(params.k, std::vector<std::uint8_t>(params.k));
        for (std::uint32_t r = 0; r < params.k; ++r) e_sel[r] = generator[sel[r]];
        const Mat inv_sel = mat_invert(std::move(e_sel));
        Mat e_erased(erased.size(), std::vector<std::uint8_t>(params.k));
        for (std::size_t r = 0; r < erased.size(); ++r) e_erased[r] = generator[erased[r]];
        const Mat solve = mat_mul(e_erased, inv_sel);

        for (std::size_t r = 0; r < erased.size(); ++r) {
            Bytes& out = chunks[erased[r]];
            out.assign(params.chunk_size, 0);
            for (std::uint32_t s = 0; s < params.k; ++s) {
                row_xor_scaled(out.data(), chunks[sel[s]].data(), params.chunk_size, solve[r][s]);
            }
        }
    }

    void recover(std::vector<Bytes>& chunks, const std::vector<std::uint32_t>& erased) const {
        if (erased.empty()) return;
        if (params.scheme == Scheme::Clay) {
            clay_recover(chunks, erased);
        } else {
            rs_fill(chunks, erased);
        }
    }

    // Bandwidth-optimal single-node repair: helpers contribute only their rows
    // in the repair planes {z : z_y0 = x0}. Each such plane pins down, through
    // the m parity checks, the lost node's U values along the whole y0-line
    // through it; re-coupling then rebuilds the lost chunk.
    Bytes repair_optimal(std::uint32_t lost, const std::vector<Bytes>& slots,
                         std::uint64_t& bytes_read) const {
        const auto& p = params;
        const std::uint32_t q = p.q();
        const std::uint32_t x0 = node_x(lost), y0 = node_y(lost);

        // Count distinct helper rows actually touched.
        std::vector<std::vector<bool>> touched(n, std::vector<bool>(alpha, false));
        std::uint64_t rows_read = 0;
        auto read_row = [&](std::uint32_t j, std::uint64_t z) -> const std::uint8_t* {
            if (!touched[j][z]) {
                touched[j][z] = true;
                ++rows_read;
            }
            return slots[j].data() + z * row_bytes;
        };

        // The line system matrix is the same for every line: the parity-check
        // columns of the y0 node group, with the coupling factor on off-x0
        // columns.
        Mat a(p.m, std::vector<std::uint8_t>(q, 0));
        for (std::uint32_t r = 0; r < p.m; ++r) {
            for (std::uint32_t c = 0; c < q; ++c) {
                const std::uint8_t h = parity_check[r][node_index(c, y0)];
                a[r][c] = (c == x0) ? h : gf::mul(kGamma, h);
            }
        }
        const Mat a_inv = mat_invert(std::move(a)); // q == m when d = n - 1

        Bytes u_lost(p.chunk_size, 0);
        std::vector<Bytes> rhs(p.m, Bytes(row_bytes));
        Bytes tmp(row_bytes);

        for (std::uint64_t zb = 0; zb < alpha; ++zb) {
            if (digit(zb, y0) != x0) continue; // repair planes only

            for (auto& r : rhs) std::fill(r.begin(), r.end(), 0);

            for (std::uint32_t j = 0; j < n; ++j) {
                if (j == lost) continue;
                const std::uint32_t x = node_x(j), y = node_y(j);
                const std::uint8_t* contrib = nullptr;
                if (y == y0) {
                    contrib = read_row(j, zb); // coupled term folded into the matrix
                } else {
                    const std::uint32_t zy = digit(zb, y);
                    if (x == zy) {
                        contrib = read_row(j, zb);
                    } else {
                        std::memcpy(tmp.data(), read_row(j, zb), row_bytes);
                        row_xor_scaled(tmp.data(),
                                       read_row(node_index(zy, y), set_digit(zb, y, x)),
                                       row_bytes, kGamma);
                        row_scale(tmp.data(), row_bytes, inv_one_plus_g2);
                        contrib = tmp.data();
                    }
                }
                for (std::uint32_t r = 0; r < p.m; ++r) {
                    row_xor_scaled(rhs[r].data(), contrib, row_bytes, parity_check[r][j]);
                }
            }

            for (std::uint32_t c = 0; c < q; ++c) {
                std::uint8_t* out = u_lost.data() + set_digit(zb, y0, c) * row_bytes;
                for (std::uint32_t r = 0; r < p.m; ++r) {
                    row_xor_scaled(out, rhs[r].data(), row_bytes, a_inv[c][r]);
                }
            }
        }

        Bytes rebuilt(p.chunk_size);
        for (std::uint64_t z = 0; z < alpha; ++z) {
            const std::uint32_t c = digit(z, y0);
            std::uint8_t* crow = rebuilt.data() + z * row_bytes;
            std::memcpy(crow, u_lost.data() + z * row_bytes, row_bytes);
            if (c != x0) {
                // U of the companion vertex, uncoupled against the lost node's U.
                const std::uint64_t zb = set_digit(z, y0, x0);
                std::memcpy(tmp.data(), read_row(node_index(c, y0), zb), row_bytes);
                row_xor_scaled(tmp.data(), u_lost.data() + z * row_bytes, row_bytes, kGamma);
                row_xor_scaled(crow, tmp.data(), row_bytes, kGamma);
            }
        }

        bytes_read = rows_read * row_bytes;
        return rebuilt;
    }
};

Codec::Codec(const CodingParams& params) : impl_(std::make_unique<Impl>(params)) {}
Codec::~Codec() = default;
Codec::Codec(Codec&&) noexcept = default;
Codec& Codec::operator=(Codec&&) noexcept = default;

const CodingParams& Codec::params() const { return impl_->params; }

std::vector<CodedChunk> Codec::encode(ByteSpan data) const {
    const auto& p = impl_->params;
    if (data.size() != p.chunkset_size()) {
        throw_error(Errc::param, "encode: data length must be k * chunk_size");
    }
    std::vector<Bytes> chunks(impl_->n);
    for (std::uint32_t i = 0; i < p.k; ++i) {
        chunks[i].assign(data.begin() + i * p.chunk_size, data.begin() + (i + 1) * p.chunk_size);
    }
    std::vector<std::uint32_t> parity;
    for (std::uint32_t i = p.k; i < impl_->n; ++i) parity.push_back(i);
    impl_->recover(chunks, parity);

    std::vector<CodedChunk> out(impl_->n);
    for (std::uint32_t i = 0; i < impl_->n; ++i) {
        out[i] = CodedChunk{i, std::move(chunks[i])};
    }
    return out;
}

namespace {

// Validates and slots the provided chunks; returns the erased index list.
std::vector<std::uint32_t> slot_chunks(const std::vector<CodedChunk>& in, std::uint32_t n,
                                       std::uint32_t k, std::uint64_t chunk_size,
                                       std::vector<Bytes>& slots) {
    slots.assign(n, Bytes{});
    std::uint32_t provided = 0;
    for (const auto& c : in) {
        if (c.index >= n) throw_error(Errc::param, "decode: chunk index out of range");
        if (c.payload.size() != chunk_size) {
            throw_error(Errc::format, "decode: inconsistent chunk size");
        }
        if (!slots[c.index].empty()) continue; // ignore duplicates
        slots[c.index] = c.payload;
        ++provided;
    }
    if (provided < k) {
        throw_error(Errc::insufficient_shards,
                    "decode: need at least k distinct chunks, have " + std::to_string(provided));
    }
    std::vector<std::uint32_t> erased;
    for (std::uint32_t j = 0; j < n; ++j) {
        if (slots[j].empty()) erased.push_back(j);
    }
    return erased;
}

} // namespace

Bytes Codec::decode(const std::vector<CodedChunk>& chunks) const {
    const auto& p = impl_->params;
    std::vector<Bytes> slots;
    std::vector<std::uint32_t> erased = slot_chunks(chunks, impl_->n, p.k, p.chunk_size, slots);

    std::vector<std::uint32_t> erased_data;
    for (auto e : erased) {
        if (e < p.k) erased_data.push_back(e);
    }
    if (!erased_data.empty()) {
        impl_->recover(slots, erased);
    }
    Bytes out;
    out.reserve(p.chunkset_size());
    for (std::uint32_t i = 0; i < p.k; ++i) {
        out.insert(out.end(), slots[i].begin(), slots[i].end());
    }
    return out;
}

std::vector<CodedChunk> Codec::decode_all(const std::vector<CodedChunk>& chunks) const {
    const auto& p = impl_->params;
    std::vector<Bytes> slots;
    std::vector<std::uint32_t> erased = slot_chunks(chunks, impl_->n, p.k, p.chunk_size, slots);
    impl_->recover(slots, erased);
    std::vector<CodedChunk> out(impl_->n);
    for (std::uint32_t i = 0; i < impl_->n; ++i) {
        out[i] = CodedChunk{i, std::move(slots[i])};
    }
    return out;
}

std::pair<CodedChunk, RepairReport> Codec::repair(std::uint32_t lost_index,
                                                  const std::vector<CodedChunk>& helpers) const {
    const auto& p = impl_->params;
    const std::uint32_t n = impl_->n;
    if (lost_index >= n) throw_error(Errc::param, "repair: lost index out of range");

    std::vector<Bytes> slots(n);
    std::vector<std::uint32_t> helper_ids;
    for (const auto& h : helpers) {
        if (h.index >= n || h.index == lost_index) {
            throw_error(Errc::param, "repair: invalid helper index");
        }
        if (h.payload.size() != p.chunk_size) {
            throw_error(Errc::format, "repair: inconsistent helper chunk size");
        }
        if (!slots[h.index].empty()) continue;
        slots[h.index] = h.payload;
        helper_ids.push_back(h.index);
    }
    std::sort(helper_ids.begin(), helper_ids.end());

    RepairReport report;
    report.repaired_index = lost_index;
    report.rs_equivalent_bytes = p.chunkset_size();

    const bool optimal_pattern = p.scheme == Scheme::Clay && p.d == n - 1 &&
                                 helper_ids.size() == std::size_t(n) - 1;

    if (optimal_pattern) {
        report.helpers_used = helper_ids;
        CodedChunk rebuilt{lost_index,
                           impl_->repair_optimal(lost_index, slots, report.bytes_downloaded)};
        return {std::move(rebuilt), std::move(report)};
    }

    if (helper_ids.size() < p.k) {
        throw_error(Errc::irrecoverable, "repair: fewer than d helpers and fewer than k chunks");
    }

    // MDS fallback: decode from the first k helpers and re-encode the stripe.
    std::vector<CodedChunk> take;
    for (std::uint32_t i = 0; i < p.k; ++i) {
        take.push_back(CodedChunk{helper_ids[i], slots[helper_ids[i]]});
        report.helpers_used.push_back(helper_ids[i]);
    }
    report.bytes_downloaded = std::uint64_t(p.k) * p.chunk_size;
    const Bytes data = decode(take);
    auto all = encode(data);
    return {std::move(all[lost_index]), std::move(report)};
}

} // namespace shelby
