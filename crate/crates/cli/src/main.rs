fn main() {
    println!("gco");
}
