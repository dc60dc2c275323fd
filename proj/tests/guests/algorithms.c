#include "guest.h"

static u64 fib(u64 n) { return n < 2 ? n : fib(n - 1) + fib(n - 2); }

static u64 xs[512];
static unsigned char bytes[300] = {1, 2, 3};

static void sort(u64* a, int n) {
    for (int i = 1; i < n; ++i) {
        u64 v = a[i];
        int j = i - 1;
        while (j >= 0 && a[j] > v) {
            a[j + 1] = a[j];
            --j;
        }
        a[j + 1] = v;
    }
}

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    puts_("fib ");
    put_u64(fib(24));
    puts_("\n");

    u64 x = 88172645463325252ull;
    for (int i = 0; i < 512; ++i) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        xs[i] = x;
    }
    sort(xs, 512);
    int ok = 1;
    for (int i = 1; i < 512; ++i) ok &= xs[i - 1] <= xs[i];
    puts_(ok ? "sorted " : "unsorted ");
    put_u64(xs[0] ^ xs[511]);
    puts_("\n");

    i64 acc = 0;
    for (int i = 0; i < 300; ++i) {
        bytes[i] = (unsigned char)(bytes[i] + i * 7);
        acc += (signed char)bytes[i];
        acc ^= (i64)(int)((unsigned)acc << 3) >> 1;
    }
    puts_("mix ");
    put_u64((u64)acc);
    puts_("\n");
    return (int)(fib(13) & 0xff);
}
