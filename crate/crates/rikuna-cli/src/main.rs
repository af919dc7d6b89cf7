fn main() {
    // placeholder; the command surface lands with the library modules
}
