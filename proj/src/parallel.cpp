#include "pide/parallel.hpp"

#include <atomic>
#include <thread>

namespace pide {

namespace {
int g_threads = 0;
}

int default_threads() {
    if (g_threads > 0) return g_threads;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_default_threads(int n) {
    g_threads = n;
}

void for_each_chunk(std::size_t n, std::size_t chunk, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk == 0) chunk = 1;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    if (threads <= 0) threads = default_threads();
    if (threads == 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    const int nw = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n_chunks));
    pool.reserve(static_cast<std::size_t>(nw));
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

double parallel_sum(std::size_t n, int threads, const std::function<double(std::size_t)>& fn) {
    const std::size_t chunk = kDefaultChunk;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(n_chunks, 0.0);
    for_each_chunk(n, chunk, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += fn(i);
        partial[c] = s;
    });
    // Neumaier-compensated merge in chunk order.
    double sum = 0.0, comp = 0.0;
    for (double v : partial) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

std::vector<double> parallel_sum_vec(std::size_t n, std::size_t width, int threads,
                                     const std::function<void(std::size_t, std::vector<double>&)>& fn) {
    const std::size_t chunk = kDefaultChunk;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(n_chunks);
    for_each_chunk(n, chunk, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::vector<double> acc(width, 0.0);
        for (std::size_t i = b; i < e; ++i) fn(i, acc);
        partial[c] = std::move(acc);
    });
    std::vector<double> out(width, 0.0);
    for (const auto& p : partial)
        for (std::size_t j = 0; j < width; ++j) out[j] += p[j];
    return out;
}

}  // namespace pide
