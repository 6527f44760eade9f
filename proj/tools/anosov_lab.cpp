#include <cstdio>

int main() {
    std::puts("anosov-lab: command-line interface under construction");
    return 0;
}
