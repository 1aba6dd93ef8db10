//! Every generator kind, with a JSON round trip through a temp file.
use fairconf::datagen::{
    fatrec_like, gen_partition_instance, gen_uniform, generate, recsys_like, GeneratorKind,
    GeneratorSpec, SlotGrid,
};
use fairconf::io::{load_instance, save_instance, InstanceFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let instances = [
        ("uniform", gen_uniform(20, 8, 10, 1)?),
        (
            "timezone",
            generate(&GeneratorSpec {
                kind: GeneratorKind::Timezone,
                m: 30,
                n: 5,
                l: 48,
                seed: 1,
                grid: Some(SlotGrid::new(48, 30)),
                offsets: None,
                interest: None,
                popularity: None,
                multiset: None,
            })?,
        ),
        ("partition", gen_partition_instance(&[3, 1, 1, 2, 2, 1])?),
        ("fatrec", fatrec_like(1)?),
        ("recsys", recsys_like(1)?),
    ];
    let dir = std::env::temp_dir().join("fairconf-generate-example");
    std::fs::create_dir_all(&dir)?;
    for (name, inst) in instances {
        let path = dir.join(format!("{name}.json"));
        save_instance(&inst, &path)?;
        let back = load_instance(&path, InstanceFormat::Json)?;
        assert_eq!(back, inst);
        println!(
            "{name:<10} m {:>4}  n {:>3}  l {:>3}  -> {}",
            inst.m(),
            inst.n(),
            inst.l(),
            path.display()
        );
    }
    Ok(())
}
