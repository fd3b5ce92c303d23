//! Free distance of the preset codes and a few small ones.

use trellis::ConvCode;

fn main() -> trellis::Result<()> {
    let codes = [
        ("(7,5)", ConvCode::from_octal(2, &["7", "5"])?),
        ("(15,17)", ConvCode::from_octal(3, &["15", "17"])?),
        ("gsm", ConvCode::gsm()),
        ("nasa", ConvCode::nasa()),
        ("is95", ConvCode::is95()),
    ];
    for (name, code) in codes {
        let d = code.free_distance(12 * code.constraint_length())?;
        let tag = if d.exact { "" } else { " (upper bound)" };
        let cat = if code.is_catastrophic() { ", catastrophic" } else { "" };
        println!("{name:8} K={} rate 1/{}  dfree={}{tag}{cat}", code.constraint_length(), code.n(), d.distance);
    }
    Ok(())
}
