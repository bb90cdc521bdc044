use aifv::bits::BitStream;
use aifv::builder::{construct, BuildConfig};
use aifv::forest::{decode, encode, read_codebook, sample_forest, write_codebook, CodeForest};
use aifv::source::SourceDistribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn forests(rng: &mut ChaCha8Rng) -> Vec<(CodeForest, SourceDistribution)> {
    let mut out = vec![(sample_forest(), SourceDistribution::new(vec![0.5, 0.3, 0.2]).unwrap())];
    for _ in 0..12 {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=3);
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.02..1.0)).collect();
        let s = SourceDistribution::from_weights(&w).unwrap();
        out.push((construct(&s, &BuildConfig::new(n)).unwrap().0, s));
    }
    out
}

#[test]
fn round_trip_with_trailing_garbage() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (f, s) in forests(&mut rng) {
        for _ in 0..150 {
            let len = rng.gen_range(0..60);
            let msg: Vec<usize> = (0..len).map(|_| s.sample(&mut rng)).collect();
            let mut bits = encode(&f, &msg).unwrap();
            for _ in 0..rng.gen_range(0..16) {
                bits.push(rng.gen());
            }
            assert_eq!(decode(&f, &bits, len).unwrap(), msg);
        }
    }
}

#[test]
fn byte_padding_is_harmless() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (f, s) in forests(&mut rng) {
        let msg: Vec<usize> = (0..100).map(|_| s.sample(&mut rng)).collect();
        let bits = encode(&f, &msg).unwrap();
        let padded = BitStream::from_bytes(bits.as_bytes(), bits.as_bytes().len() * 8).unwrap();
        assert_eq!(decode(&f, &padded, msg.len()).unwrap(), msg);
        // Asking for fewer symbols yields a prefix.
        assert_eq!(decode(&f, &padded, 40).unwrap(), msg[..40]);
    }
}

#[test]
fn codebooks_survive_text_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for (f, _) in forests(&mut rng) {
        assert_eq!(read_codebook(&write_codebook(&f)).unwrap(), f);
    }
}
