fn main() { println!("cylfrac"); }
