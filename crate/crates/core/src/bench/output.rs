use std::io::Write;

use crate::elements::LagrangeSpace;
use crate::error::Result;
use crate::field::Field;
use crate::physics::Mhd2d;

/// Nodal field written to VTU, with 1 or 2 components per dof.
pub struct PointData<'a> {
    pub name: &'a str,
    pub components: Vec<&'a [f64]>,
}

/// Writes the fine P1 submesh as an XML unstructured grid with float64 point
/// data; periodic images repeat the value of their dof.
pub fn write_vtu<const D: usize>(space: &LagrangeSpace<D>, data: &[PointData<'_>], mut w: impl Write) -> Result<()> {
    let fine = space.fine_mesh();
    let (np, nc) = (fine.num_vertices(), fine.num_cells());
    writeln!(w, r#"<?xml version="1.0"?>"#)?;
    writeln!(w, r#"<VTKFile type="UnstructuredGrid" version="0.1" byte_order="LittleEndian">"#)?;
    writeln!(w, "<UnstructuredGrid>")?;
    writeln!(w, r#"<Piece NumberOfPoints="{np}" NumberOfCells="{nc}">"#)?;
    writeln!(w, "<PointData>")?;
    for d in data {
        let ncomp = if d.components.len() == 1 { 1 } else { 3 };
        writeln!(
            w,
            r#"<DataArray type="Float64" Name="{}" NumberOfComponents="{ncomp}" format="ascii">"#,
            d.name
        )?;
        for v in 0..np {
            let i = space.node_dof(v);
            let vals: Vec<f64> = (0..ncomp).map(|c| d.components.get(c).map_or(0.0, |x| x[i])).collect();
            writeln!(w, "{}", join(&vals))?;
        }
        writeln!(w, "</DataArray>")?;
    }
    writeln!(w, "</PointData>")?;
    writeln!(w, "<Points>")?;
    writeln!(w, r#"<DataArray type="Float64" NumberOfComponents="3" format="ascii">"#)?;
    for x in fine.vertices() {
        let p: Vec<f64> = (0..3).map(|a| if a < D { x[a] } else { 0.0 }).collect();
        writeln!(w, "{}", join(&p))?;
    }
    writeln!(w, "</DataArray>")?;
    writeln!(w, "</Points>")?;
    writeln!(w, "<Cells>")?;
    writeln!(w, r#"<DataArray type="Int64" Name="connectivity" format="ascii">"#)?;
    for c in 0..nc {
        let ids: Vec<String> = fine.cell(c).iter().map(usize::to_string).collect();
        writeln!(w, "{}", ids.join(" "))?;
    }
    writeln!(w, "</DataArray>")?;
    writeln!(w, r#"<DataArray type="Int64" Name="offsets" format="ascii">"#)?;
    for c in 0..nc {
        writeln!(w, "{}", (c + 1) * (D + 1))?;
    }
    writeln!(w, "</DataArray>")?;
    writeln!(w, r#"<DataArray type="UInt8" Name="types" format="ascii">"#)?;
    let vtk_type = match D {
        1 => 3,
        2 => 5,
        _ => 10,
    };
    for _ in 0..nc {
        writeln!(w, "{vtk_type}")?;
    }
    writeln!(w, "</DataArray>")?;
    writeln!(w, "</Cells>")?;
    writeln!(w, "</Piece>")?;
    writeln!(w, "</UnstructuredGrid>")?;
    writeln!(w, "</VTKFile>")?;
    Ok(())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

/// Primitive variables per dof: `(rho, u_x, u_y, p, B_x, B_y)`.
pub fn primitive_fields(law: &Mhd2d, u: &Field) -> Result<[Vec<f64>; 6]> {
    let mut out: [Vec<f64>; 6] = Default::default();
    for i in 0..u.ndof() {
        let w = law.primitive(&u.node(i))?;
        for (o, v) in out.iter_mut().zip([w.rho, w.u[0], w.u[1], w.p, w.b[0], w.b[1]]) {
            o.push(v);
        }
    }
    Ok(out)
}

/// Writes the primitive variables of an MHD state plus `extra` scalar fields.
pub fn write_mhd_vtu(
    space: &LagrangeSpace<2>,
    law: &Mhd2d,
    u: &Field,
    extra: &[(&str, &[f64])],
    w: impl Write,
) -> Result<()> {
    let [rho, ux, uy, p, bx, by] = primitive_fields(law, u)?;
    let mut data = vec![
        PointData {
            name: "rho",
            components: vec![&rho],
        },
        PointData {
            name: "u",
            components: vec![&ux, &uy],
        },
        PointData {
            name: "p",
            components: vec![&p],
        },
        PointData {
            name: "B",
            components: vec![&bx, &by],
        },
    ];
    for (name, x) in extra {
        data.push(PointData {
            name,
            components: vec![x],
        });
    }
    write_vtu(space, &data, w)
}

/// Nodal CSV: `x,y,rho,ux,uy,p,bx,by` with one row per dof.
pub fn write_nodal_csv(space: &LagrangeSpace<2>, law: &Mhd2d, u: &Field, mut w: impl Write) -> Result<()> {
    let [rho, ux, uy, p, bx, by] = primitive_fields(law, u)?;
    writeln!(w, "x,y,rho,ux,uy,p,bx,by")?;
    for i in 0..u.ndof() {
        let x = space.dof_coord(i);
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            x[0], x[1], rho[i], ux[i], uy[i], p[i], bx[i], by[i]
        )?;
    }
    Ok(())
}

/// `key: value` run description.
pub fn write_metadata(entries: &[(&str, String)], mut w: impl Write) -> Result<()> {
    writeln!(w, "{{")?;
    for (k, (key, value)) in entries.iter().enumerate() {
        let sep = if k + 1 < entries.len() { "," } else { "" };
        writeln!(w, "  \"{key}\": \"{}\"{sep}", value.replace('"', "'"))?;
    }
    writeln!(w, "}}")?;
    Ok(())
}
